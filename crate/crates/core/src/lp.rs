//! Exact revised simplex for the gauge program
//!
//! ```text
//! minimize  sum_i (l+_i + l-_i)
//! subject   sum_i g_i (l+_i - l-_i) = x,   l+, l- >= 0
//! ```
//!
//! whose optimum is the gauge of `x` with respect to `co{±g_i}`. The
//! optimal dual `y` satisfies `|y . g_i| <= 1` for all `i` and `y . x` equals
//! the gauge, so it doubles as a supporting functional certificate.

use crate::error::{Error, Result};
use crate::linalg::{self, RatVec};
use crate::rat::Rat;

#[derive(Clone, Debug)]
pub struct GaugeSolution {
    pub value: Rat,
    /// Supporting functional: `|dual . g| <= 1` on every generator.
    pub dual: RatVec,
    /// Signed generator coefficients `(index, coefficient)` of the optimal
    /// representation of `x`.
    pub combination: Vec<(usize, Rat)>,
}

const DEGENERATE_SWITCH: usize = 32;

/// Column set of a gauge program, possibly implicit. The program runs over
/// `±column(i)`.
pub trait Columns {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn column(&self, i: usize) -> RatVec;
    /// Columns containing a basis of the space.
    fn spanning(&self) -> Vec<usize>;
    /// Index `i` maximizing `|y . column(i)|`, with `y . column(i)`.
    fn most_violated(&self, y: &[Rat]) -> Option<(usize, Rat)> {
        let mut best: Option<(usize, Rat)> = None;
        for i in 0..self.len() {
            let p = linalg::dot(y, &self.column(i));
            if best.as_ref().is_none_or(|b| p.abs() > b.1.abs()) {
                best = Some((i, p));
            }
        }
        best
    }
}

struct Explicit<'a>(&'a [RatVec], usize);

impl Columns for Explicit<'_> {
    fn dim(&self) -> usize {
        self.1
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn column(&self, i: usize) -> RatVec {
        self.0[i].clone()
    }
    fn spanning(&self) -> Vec<usize> {
        (0..self.0.len()).collect()
    }
}

/// Columns `s a_i + t b_j` of the Minkowski sum `s co{±a} + t co{±b}`;
/// pricing separates because both bodies are symmetric.
pub struct MinkowskiColumns<'a> {
    pub a: &'a [RatVec],
    pub b: &'a [RatVec],
    pub s: Rat,
    pub t: Rat,
}

impl MinkowskiColumns<'_> {
    fn split(&self, i: usize) -> (usize, usize, bool) {
        let nb = self.b.len();
        let (i, neg_b) = (i % (self.a.len() * nb), i >= self.a.len() * nb);
        (i / nb, i % nb, neg_b)
    }
}

impl Columns for MinkowskiColumns<'_> {
    fn dim(&self) -> usize {
        self.a.first().or(self.b.first()).map_or(0, Vec::len)
    }
    /// Pairs `(i, j)` and `(i, -j)`.
    fn len(&self) -> usize {
        2 * self.a.len() * self.b.len()
    }
    fn column(&self, i: usize) -> RatVec {
        let (ia, ib, neg) = self.split(i);
        let tb = if neg { -&self.t } else { self.t.clone() };
        linalg::add(&linalg::scale(&self.a[ia], &self.s), &linalg::scale(&self.b[ib], &tb))
    }
    fn spanning(&self) -> Vec<usize> {
        let nb = self.b.len();
        let mut out: Vec<usize> = (0..self.a.len()).map(|ia| ia * nb).collect();
        for ib in 0..nb {
            out.push(ib);
            out.push(self.a.len() * nb + ib);
        }
        out
    }
    fn most_violated(&self, y: &[Rat]) -> Option<(usize, Rat)> {
        let arg = |v: &[RatVec]| {
            v.iter()
                .enumerate()
                .map(|(k, g)| (k, linalg::dot(y, g)))
                .max_by(|p, q| p.1.abs().cmp(&q.1.abs()))
        };
        let (ia, pa) = arg(self.a)?;
        let (ib, pb) = arg(self.b)?;
        // align the sign of the b part with the a part
        let neg = pa.is_negative() != pb.is_negative() && !pa.is_zero() && !pb.is_zero();
        let idx = if neg { self.a.len() * self.b.len() } else { 0 } + ia * self.b.len() + ib;
        let pb = if neg { -pb } else { pb };
        Some((idx, &self.s * pa + &self.t * pb))
    }
}

/// Gauge of `x` in `co{±g : g in gens}`; errors when the generators do not
/// span `x`'s space.
pub fn hull_gauge(gens: &[RatVec], x: &[Rat]) -> Result<GaugeSolution> {
    let d = x.len();
    if gens.iter().any(|g| g.len() != d) {
        let bad = gens.iter().find(|g| g.len() != d).map_or(0, Vec::len);
        return Err(Error::DimensionMismatch { expected: d, got: bad });
    }
    gauge_over(&Explicit(gens, d), x)
}

/// Gauge of `x` over the symmetric hull of a column set.
pub fn gauge_over<C: Columns + ?Sized>(cols_set: &C, x: &[Rat]) -> Result<GaugeSolution> {
    let d = x.len();
    if cols_set.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: cols_set.dim() });
    }
    let candidates = cols_set.spanning();
    let cand_vecs: Vec<RatVec> = candidates.iter().map(|&i| cols_set.column(i)).collect();
    let basis_idx: Vec<usize> = linalg::independent_subset(&cand_vecs).into_iter().map(|k| candidates[k]).collect();
    if basis_idx.len() < d {
        return Err(Error::NotANorm(d));
    }
    if linalg::is_zero(x) {
        return Ok(GaugeSolution { value: Rat::zero(), dual: linalg::zeros(d), combination: vec![] });
    }
    // Initial basis from independent generators with signs making it feasible.
    let cols: Vec<RatVec> = basis_idx.iter().map(|&i| cols_set.column(i)).collect();
    let mt: Vec<RatVec> = (0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    let lam = linalg::solve(&mt, x).ok_or(Error::NotANorm(d))?;
    let mut basis: Vec<(usize, i32)> = Vec::with_capacity(d);
    let mut values: RatVec = Vec::with_capacity(d);
    for (k, &i) in basis_idx.iter().enumerate() {
        let s = if lam[k].is_negative() { -1 } else { 1 };
        basis.push((i, s));
        values.push(lam[k].abs());
    }
    let bmat: Vec<RatVec> = (0..d)
        .map(|r| basis.iter().zip(&cols).map(|(&(_, s), c)| signed(&c[r], s)).collect())
        .collect();
    let mut binv = linalg::inverse(&bmat).ok_or(Error::NotANorm(d))?;

    let mut degenerate_run = 0usize;
    let mut bland = false;
    loop {
        // y_j = sum_k binv[k][j]
        let y: RatVec = (0..d)
            .map(|j| binv.iter().fold(Rat::zero(), |acc, row| acc + &row[j]))
            .collect();
        let entering = if bland {
            let mut found = None;
            'outer: for i in 0..cols_set.len() {
                let p = linalg::dot(&y, &cols_set.column(i));
                for s in [1, -1] {
                    if signed(&p, s) > Rat::one() && !basis.contains(&(i, s)) {
                        found = Some((i, s));
                        break 'outer;
                    }
                }
            }
            found
        } else {
            cols_set
                .most_violated(&y)
                .filter(|(_, p)| p.abs() > Rat::one())
                .map(|(i, p)| (i, if p.is_negative() { -1 } else { 1 }))
        };
        let Some((ei, es)) = entering else {
            let value: Rat = values.iter().sum();
            let combination = basis
                .iter()
                .zip(&values)
                .filter(|(_, v)| !v.is_zero())
                .map(|(&(i, s), v)| (i, signed(v, s)))
                .collect();
            return Ok(GaugeSolution { value, dual: y, combination });
        };
        let col: RatVec = cols_set.column(ei).iter().map(|c| signed(c, es)).collect();
        let u: RatVec = binv.iter().map(|row| linalg::dot(row, &col)).collect();
        let mut leave: Option<(usize, Rat)> = None;
        for k in 0..d {
            if u[k].is_positive() {
                let ratio = &values[k] / &u[k];
                let better = match &leave {
                    None => true,
                    Some((lk, lr)) => {
                        ratio < *lr || (ratio == *lr && basis[k].0 < basis[*lk].0)
                    }
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
        }
        // Bounded objective: the program always has a finite optimum.
        let (r, theta) = leave.expect("gauge program is bounded");
        if theta.is_zero() {
            degenerate_run += 1;
            if degenerate_run > DEGENERATE_SWITCH {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        for k in 0..d {
            if k == r {
                values[k] = theta.clone();
            } else if !u[k].is_zero() {
                let t = &u[k] * &theta;
                values[k] -= &t;
            }
        }
        basis[r] = (ei, es);
        let pivot = u[r].clone();
        let prow: RatVec = binv[r].iter().map(|v| v / &pivot).collect();
        for k in 0..d {
            if k != r && !u[k].is_zero() {
                let f = u[k].clone();
                for j in 0..d {
                    let t = &prow[j] * &f;
                    binv[k][j] -= &t;
                }
            }
        }
        binv[r] = prow;
    }
}

fn signed(v: &Rat, s: i32) -> Rat {
    if s < 0 {
        -v
    } else {
        v.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    #[test]
    fn square_gauge() {
        let gens = vec![v(&[1, 1]), v(&[1, -1])];
        let sol = hull_gauge(&gens, &v(&[2, 1])).unwrap();
        assert_eq!(sol.value, Rat::int(2));
        for g in &gens {
            assert!(linalg::dot(&sol.dual, g).abs() <= Rat::one());
        }
        assert_eq!(linalg::dot(&sol.dual, &v(&[2, 1])), Rat::int(2));
    }

    #[test]
    fn skewed_ball() {
        let gens = vec![v(&[2, 1]), v(&[0, 1])];
        assert_eq!(hull_gauge(&gens, &v(&[2, 0])).unwrap().value, Rat::int(2));
    }

    #[test]
    fn rejects_non_spanning() {
        let gens = vec![v(&[1, 1]), v(&[2, 2])];
        assert_eq!(hull_gauge(&gens, &v(&[1, 0])).unwrap_err(), Error::NotANorm(2));
    }

    #[test]
    fn combination_reproduces_x() {
        let gens = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[1, 1, 1]), v(&[1, -1, 2])];
        let x = v(&[3, -2, 5]);
        let sol = hull_gauge(&gens, &x).unwrap();
        let mut acc = linalg::zeros(3);
        let mut total = Rat::zero();
        for (i, c) in &sol.combination {
            acc = linalg::add(&acc, &linalg::scale(&gens[*i], c));
            total += &c.abs();
        }
        assert_eq!(acc, x);
        assert_eq!(total, sol.value);
    }

    #[test]
    fn implicit_sum_matches_materialized() {
        let a = vec![v(&[2, 1, 0]), v(&[0, 1, -1]), v(&[1, 0, 3])];
        let b = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[1, 1, 1])];
        for (s, t) in [(Rat::int(2), Rat::new(1, 2)), (Rat::int(16), Rat::new(1, 16)), (Rat::new(1, 3), Rat::int(5))] {
            let cols = MinkowskiColumns { a: &a, b: &b, s: s.clone(), t: t.clone() };
            let all: Vec<RatVec> = (0..cols.len()).map(|i| cols.column(i)).collect();
            for x in [v(&[3, -2, 5]), v(&[0, 0, 1]), v(&[-7, 4, 1]), v(&[1, 1, 1])] {
                let implicit = gauge_over(&cols, &x).unwrap();
                assert_eq!(implicit.value, hull_gauge(&all, &x).unwrap().value);
                for g in &all {
                    assert!(linalg::dot(&implicit.dual, g).abs() <= Rat::one());
                }
            }
        }
    }
}
