//! Vertex enumeration for centrally symmetric polytopes given by
//! inequalities `|a_i . x| <= 1`, via the double description method on the
//! homogenized cone `{(x, t) : t - a_i . x >= 0, t + a_i . x >= 0}`.
//!
//! Facet enumeration of `co{±v_j}` is the same problem on the polar body,
//! so both directions go through [`symmetric_vertices`].

use crate::error::{Error, Result};
use crate::linalg::{self, RatVec};
use crate::rat::Rat;

#[derive(Clone)]
struct Ray {
    y: RatVec,
    zeros: Vec<u64>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn and_count(a: &[u64], b: &[u64]) -> (Vec<u64>, u32) {
    let v: Vec<u64> = a.iter().zip(b).map(|(x, y)| x & y).collect();
    let c = v.iter().map(|w| w.count_ones()).sum();
    (v, c)
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn normalize_ray(mut y: RatVec) -> RatVec {
    let n = y.len();
    let t = y[n - 1].clone();
    if t.is_positive() {
        for v in &mut y {
            *v = &*v / &t;
        }
        return y;
    }
    if let Some(p) = y.iter().find(|v| !v.is_zero()).map(Rat::abs) {
        for v in &mut y {
            *v = &*v / &p;
        }
    }
    y
}

/// Sign-normalized, deduplicated nonzero rows.
pub fn dedup_rows(rows: &[RatVec]) -> Vec<RatVec> {
    let mut out: Vec<RatVec> = rows
        .iter()
        .filter(|r| !linalg::is_zero(r))
        .map(|r| linalg::sign_normalize(r))
        .collect();
    out.sort_by(|a, b| linalg::lex_cmp(a, b));
    out.dedup();
    out
}

/// All vertices of `{x in R^d : |a . x| <= 1 for a in rows}`; errors when
/// the body is unbounded (rows do not span).
pub fn symmetric_vertices(rows: &[RatVec], d: usize) -> Result<Vec<RatVec>> {
    let rows = dedup_rows(rows);
    if linalg::rank(&rows) < d {
        return Err(Error::NotANorm(d));
    }
    let n = d + 1;
    let mut cons: Vec<RatVec> = Vec::with_capacity(2 * rows.len());
    for a in &rows {
        let mut lo = linalg::neg(a);
        lo.push(Rat::one());
        let mut hi = a.clone();
        hi.push(Rat::one());
        cons.push(lo);
        cons.push(hi);
    }
    let words = cons.len().div_ceil(64);
    let init = linalg::independent_subset(&cons);
    debug_assert_eq!(init.len(), n);
    let a0: Vec<RatVec> = init.iter().map(|&i| cons[i].clone()).collect();
    let inv = linalg::inverse(&a0).ok_or(Error::NotANorm(d))?;
    let mut rays: Vec<Ray> = (0..n)
        .map(|j| {
            let y: RatVec = (0..n).map(|r| inv[r][j].clone()).collect();
            let mut zeros = vec![0u64; words];
            for (k, &ci) in init.iter().enumerate() {
                if k != j {
                    set_bit(&mut zeros, ci);
                }
            }
            Ray { y: normalize_ray(y), zeros }
        })
        .collect();
    let mut processed = vec![false; cons.len()];
    for &i in &init {
        processed[i] = true;
    }
    for ci in 0..cons.len() {
        if processed[ci] {
            continue;
        }
        processed[ci] = true;
        let a = &cons[ci];
        let vals: Vec<Rat> = rays.iter().map(|r| linalg::dot(a, &r.y)).collect();
        let mut next: Vec<Ray> = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (k, r) in rays.iter().enumerate() {
            match vals[k].signum() {
                1 => {
                    pos.push(k);
                    next.push(r.clone());
                }
                0 => {
                    let mut r = r.clone();
                    set_bit(&mut r.zeros, ci);
                    next.push(r);
                }
                _ => neg.push(k),
            }
        }
        if neg.is_empty() {
            rays = next;
            continue;
        }
        for &p in &pos {
            for &q in &neg {
                let (common, cnt) = and_count(&rays[p].zeros, &rays[q].zeros);
                if (cnt as usize) + 2 < n {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(k, r)| {
                    k == p || k == q || !is_subset(&common, &r.zeros)
                });
                if !adjacent {
                    continue;
                }
                let vp = &vals[p];
                let vq = &vals[q];
                let y: RatVec = rays[q]
                    .y
                    .iter()
                    .zip(&rays[p].y)
                    .map(|(yq, yp)| vp * yq - vq * yp)
                    .collect();
                let mut zeros = common;
                set_bit(&mut zeros, ci);
                next.push(Ray { y: normalize_ray(y), zeros });
            }
        }
        rays = next;
    }
    let mut out: Vec<RatVec> = rays
        .into_iter()
        .filter(|r| r.y[d].is_positive())
        .map(|r| r.y[..d].to_vec())
        .collect();
    out.sort_by(|a, b| linalg::lex_cmp(a, b));
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    #[test]
    fn cube_vertices() {
        let rows = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])];
        let verts = symmetric_vertices(&rows, 3).unwrap();
        assert_eq!(verts.len(), 8);
        assert!(verts.contains(&v(&[1, -1, 1])));
    }

    #[test]
    fn diamond_vertices() {
        let rows = vec![v(&[1, 1]), v(&[1, -1])];
        let verts = symmetric_vertices(&rows, 2).unwrap();
        assert_eq!(verts, vec![v(&[-1, 0]), v(&[0, -1]), v(&[0, 1]), v(&[1, 0])]);
    }

    #[test]
    fn octahedron_vertices_with_redundant_rows() {
        let mut rows = Vec::new();
        for a in [-1, 1] {
            for b in [-1, 1] {
                rows.push(v(&[1, a, b]));
            }
        }
        rows.push(v(&[0, 0, 1]));
        let verts = symmetric_vertices(&rows, 3).unwrap();
        assert_eq!(verts.len(), 6);
    }
}
