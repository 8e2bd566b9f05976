//! Gauge of `co(P ∪ r·B)` for a symmetric rational polytope `P` and the
//! Euclidean ball `B` scaled by `r` with rational `r²`.
//!
//! The gauge is the support function of the polar body
//! `K° = P° ∩ (1/r)·B`. A maximizer of `a . x` over `K°` either is a point
//! with some polytope constraints active and the sphere inactive, or lies on
//! the sphere. For every independent signed set `S` of active constraints
//! `a . g_i = s_i`, the candidates are the minimum norm point `a0` of that
//! affine set and the sphere point `a0 + sqrt(M)·w`, where `w` is the
//! projection of `x` onto the orthogonal complement of `span{g_i : i in S}`.
//! Feasibility of each candidate is decided exactly, so the maximum over the
//! feasible candidates is the exact gauge, of the form `q + sqrt(s)`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::interval::{sign_lin, CertInterval, QuadSurd};
use crate::linalg::{self, RatVec};
use crate::polytope::PolytopeBall;
use crate::rat::Rat;

#[derive(Clone, Debug)]
pub struct HullBody {
    pub poly: PolytopeBall,
    /// `r²` for the Euclidean ball radius `r`.
    pub radius_sq: Rat,
}

impl HullBody {
    pub fn new(poly: PolytopeBall, radius_sq: Rat) -> Result<HullBody> {
        if !radius_sq.is_positive() {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        Ok(HullBody { poly, radius_sq })
    }

    /// `co({±1}^3 ∪ sqrt(2)·B)` in `R^3`.
    pub fn cube_and_sphere() -> HullBody {
        let mut gens = Vec::new();
        for a in [-1, 1] {
            for b in [-1, 1] {
                gens.push(vec![Rat::one(), Rat::int(a), Rat::int(b)]);
            }
        }
        let poly = PolytopeBall::new(3, gens).expect("cube spans");
        HullBody { poly, radius_sq: Rat::int(2) }
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    /// Exact gauge as `q + sqrt(s)`.
    pub fn gauge_exact(&self, x: &[Rat]) -> Result<QuadSurd> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        if linalg::is_zero(x) {
            return Ok(QuadSurd::rat(Rat::zero()));
        }
        let gens = self.poly.generators();
        let inv_r2 = self.radius_sq.recip();
        let mut best: Option<QuadSurd> = None;
        let mut consider = |c: QuadSurd| {
            if best.as_ref().is_none_or(|b| c.cmp_exact(b) == Ordering::Greater) {
                best = Some(c);
            }
        };
        let mut stack: Vec<(usize, i32)> = Vec::new();
        let m = gens.len();
        // Depth-first over signed subsets with increasing indices.
        fn walk(
            start: usize,
            m: usize,
            d: usize,
            stack: &mut Vec<(usize, i32)>,
            visit: &mut dyn FnMut(&[(usize, i32)]) -> bool,
        ) {
            if !visit(stack) {
                return;
            }
            if stack.len() == d {
                return;
            }
            for i in start..m {
                for s in [1, -1] {
                    stack.push((i, s));
                    walk(i + 1, m, d, stack, visit);
                    stack.pop();
                }
            }
        }
        let mut visit = |set: &[(usize, i32)]| -> bool {
            let g: Vec<RatVec> = set.iter().map(|&(i, _)| gens[i].clone()).collect();
            if linalg::rank(&g) < g.len() {
                return false;
            }
            let rhs: RatVec = set.iter().map(|&(_, s)| Rat::int(s as i64)).collect();
            let Some(a0) = linalg::min_norm_solution(&g, &rhs, d) else {
                return false;
            };
            let n0 = linalg::norm2_sq(&a0);
            if n0 > inv_r2 {
                // Deeper sets lie in this affine set and miss the ball too.
                return false;
            }
            let feasible_a0 = gens.iter().all(|gj| linalg::dot(&a0, gj).abs() <= Rat::one());
            if feasible_a0 {
                consider(QuadSurd::rat(linalg::dot(x, &a0)));
            }
            if n0 < inv_r2 {
                let w = linalg::project_out(&g, x).expect("independent rows");
                let ww = linalg::norm2_sq(&w);
                if !ww.is_zero() {
                    let mm = (&inv_r2 - &n0) / &ww;
                    let ok = gens.iter().all(|gj| {
                        let p = linalg::dot(&a0, gj);
                        let q = linalg::dot(&w, gj);
                        sign_lin(&(&p - &Rat::one()), &q, &mm) != Ordering::Greater
                            && sign_lin(&(&p + &Rat::one()), &q, &mm) != Ordering::Less
                    });
                    if ok {
                        consider(QuadSurd::new(linalg::dot(x, &a0), (&inv_r2 - &n0) * &ww));
                    }
                }
            }
            true
        };
        walk(0, m, d, &mut stack, &mut visit);
        Ok(best.expect("the origin of the polar body is always feasible"))
    }

    /// Enclosure of the gauge with width at most `eps`.
    pub fn gauge_interval(&self, x: &[Rat], eps: &Rat) -> Result<CertInterval> {
        if !eps.is_positive() {
            return Err(Error::InvalidArgument("eps must be positive".into()));
        }
        Ok(self.gauge_exact(x)?.enclose(eps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    /// Independent route: minimize `t + sqrt(sum (|x_i| - t)_+^2) / sqrt(2)`
    /// over `t >= 0` by golden-section search in floating point.
    fn inf_convolution(x: &[f64]) -> f64 {
        let f = |t: f64| {
            let s: f64 = x.iter().map(|xi| (xi.abs() - t).max(0.0).powi(2)).sum();
            t + s.sqrt() / 2f64.sqrt()
        };
        let (mut a, mut b) = (0.0, x.iter().fold(0f64, |m, v| m.max(v.abs())));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f((a + b) / 2.0)
    }

    #[test]
    fn anchors() {
        let body = HullBody::cube_and_sphere();
        let eps = Rat::new(1, 1_000_000_000);
        assert_eq!(body.gauge_exact(&v(&[1, 1, 1])).unwrap().cmp_rat(&Rat::one()), Ordering::Equal);
        let z = body.gauge_interval(&v(&[0, 0, 0]), &eps).unwrap();
        assert!(z.lo.is_zero() && z.hi.is_zero());
        let iv = body.gauge_interval(&v(&[2, 0, 0]), &eps).unwrap();
        assert!(iv.contains_f64(2f64.sqrt()));
        assert!(iv.width() <= eps);
    }

    #[test]
    fn agrees_with_infimal_convolution() {
        let body = HullBody::cube_and_sphere();
        let pts: Vec<[i64; 3]> = vec![
            [3, 2, 1],
            [5, -1, 0],
            [1, 1, -3],
            [7, 6, 2],
            [-2, 9, 9],
            [4, 4, 1],
            [10, 1, 1],
        ];
        for p in pts {
            let x: Vec<f64> = p.iter().map(|&c| c as f64).collect();
            let got = body.gauge_exact(&v(&p)).unwrap().to_f64();
            let want = inf_convolution(&x);
            assert!((got - want).abs() < 1e-9, "{p:?}: {got} vs {want}");
        }
    }
}
