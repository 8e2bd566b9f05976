//! Dense exact linear algebra on small rational matrices.

use crate::rat::Rat;

pub type RatVec = Vec<Rat>;

pub fn zeros(d: usize) -> RatVec {
    vec![Rat::zero(); d]
}

pub fn unit(d: usize, i: usize) -> RatVec {
    let mut v = zeros(d);
    v[i] = Rat::one();
    v
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += &(x * y);
        }
    }
    s
}

pub fn add(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> RatVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rat], c: &Rat) -> RatVec {
    a.iter().map(|x| x * c).collect()
}

pub fn neg(a: &[Rat]) -> RatVec {
    a.iter().map(|x| -x).collect()
}

pub fn norm2_sq(a: &[Rat]) -> Rat {
    dot(a, a)
}

pub fn is_zero(a: &[Rat]) -> bool {
    a.iter().all(Rat::is_zero)
}

/// Flip the sign so that the first nonzero coordinate is positive.
pub fn sign_normalize(a: &[Rat]) -> RatVec {
    match a.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => neg(a),
        _ => a.to_vec(),
    }
}

/// Lexicographic comparison by value.
pub fn lex_cmp(a: &[Rat], b: &[Rat]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub fn parse_vec(items: &[String]) -> crate::error::Result<RatVec> {
    items.iter().map(|s| s.parse()).collect()
}

pub fn fmt_vec(v: &[Rat]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Row-reduce a copy of `rows` and return its rank.
pub fn rank(rows: &[RatVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<RatVec> = rows.to_vec();
    let ncols = m[0].len();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for j in c..ncols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= &t;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solve the square system `a x = b`; `None` when singular.
pub fn solve(a: &[RatVec], b: &[Rat]) -> Option<RatVec> {
    let n = a.len();
    let mut m: Vec<RatVec> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let pivot = m[c][c].clone();
        for j in c..=n {
            m[c][j] = &m[c][j] / &pivot;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..=n {
                    let t = &m[c][j] * &f;
                    m[i][j] -= &t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Inverse of a square matrix; `None` when singular.
pub fn inverse(a: &[RatVec]) -> Option<Vec<RatVec>> {
    let n = a.len();
    let mut m: Vec<RatVec> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit(n, i));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let pivot = m[c][c].clone();
        for j in 0..2 * n {
            m[c][j] = &m[c][j] / &pivot;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * n {
                    let t = &m[c][j] * &f;
                    m[i][j] -= &t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Indices of a maximal linearly independent subfamily, chosen greedily.
pub fn independent_subset(vecs: &[RatVec]) -> Vec<usize> {
    let mut basis: Vec<RatVec> = Vec::new();
    let mut chosen = Vec::new();
    let dim = vecs.first().map_or(0, Vec::len);
    for (i, v) in vecs.iter().enumerate() {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if rank(&trial) == trial.len() {
            basis = trial;
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}

/// Orthonormal-free projector data: the minimum norm solution of
/// `G a = s` (rows of `G` independent) and the projection of `x` onto the
/// orthogonal complement of the row space.
pub fn min_norm_solution(g: &[RatVec], s: &[Rat], d: usize) -> Option<RatVec> {
    // a = G^T (G G^T)^{-1} s
    let k = g.len();
    if k == 0 {
        return Some(zeros(d));
    }
    let gram: Vec<RatVec> = (0..k).map(|i| (0..k).map(|j| dot(&g[i], &g[j])).collect()).collect();
    let y = solve(&gram, s)?;
    let mut a = zeros(d);
    for (yi, gi) in y.iter().zip(g) {
        for (aj, gij) in a.iter_mut().zip(gi) {
            *aj += &(yi * gij);
        }
    }
    Some(a)
}

pub fn project_out(g: &[RatVec], x: &[Rat]) -> Option<RatVec> {
    if g.is_empty() {
        return Some(x.to_vec());
    }
    let rhs: RatVec = g.iter().map(|gi| dot(gi, x)).collect();
    let p = min_norm_solution(g, &rhs, x.len())?;
    Some(sub(x, &p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    #[test]
    fn rank_and_solve() {
        let rows = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        assert_eq!(rank(&rows), 2);
        let a = vec![v(&[2, 1]), v(&[1, 3])];
        let x = solve(&a, &v(&[3, 5])).unwrap();
        assert_eq!(x, vec![Rat::new(4, 5), Rat::new(7, 5)]);
        let inv = inverse(&a).unwrap();
        assert_eq!(inv[0], vec![Rat::new(3, 5), Rat::new(-1, 5)]);
    }

    #[test]
    fn projection_is_orthogonal() {
        let g = vec![v(&[1, 1, 0])];
        let w = project_out(&g, &v(&[2, 0, 1])).unwrap();
        assert!(dot(&w, &g[0]).is_zero());
        assert_eq!(w, v(&[1, -1, 1]));
        let a = min_norm_solution(&g, &[Rat::one()], 3).unwrap();
        assert_eq!(a, vec![Rat::new(1, 2), Rat::new(1, 2), Rat::zero()]);
    }
}
