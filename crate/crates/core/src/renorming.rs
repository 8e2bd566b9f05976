//! The seminorms `β` and `α`, the norms `‖·‖_I` and `‖·‖_II` over an
//! embedding frame, the auxiliary norm `ρ` on `R^3`, and the inequality
//! checks attached to them.
//!
//! On a frame `F_D` both series are finite sums: every coordinate past the
//! truncation is zero. In particular the `β` term of slot `(n, k)` whose
//! successor `(n+1, k)` lies outside `F_D` is `|e*_(n,k)(f)|²` with its
//! weight, so `β` is a norm on `F_D` and `‖·‖_I` is strictly convex there.
//! Flat segments of `‖·‖_I` and `‖·‖_II` live in the image of the
//! untruncated `U`, which is handled symbolically through [`UImage`].

use std::cmp::Ordering;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::embedding::{EmbeddingFrame, UImage};
use crate::error::{Error, Result};
use crate::hull_body::HullBody;
use crate::interval::{CertInterval, QuadSurd};
use crate::linalg;
use crate::rat::Rat;
use crate::space;

fn weight(n: u64, k: u64) -> Rat {
    Rat::pow2(-4 * catalog::pi_inverse(n, k) as i64)
}

fn check(frame: &EmbeddingFrame, f: &[Rat]) -> Result<()> {
    if f.len() != frame.depth {
        return Err(Error::DimensionMismatch { expected: frame.depth, got: f.len() });
    }
    Ok(())
}

/// `e*_(n,k)(f)`, zero outside the truncation.
fn coord(frame: &EmbeddingFrame, f: &[Rat], n: u64, k: u64) -> Rat {
    frame.coord_of(n, k).map(|i| f[i].clone()).unwrap_or_default()
}

/// `β(f)² = Σ 2^(-4π⁻¹(n+1,k)) |e*_(n,k)(f) - 2e*_(n+1,k)(f)|²`.
pub fn beta_sq(frame: &EmbeddingFrame, f: &[Rat]) -> Result<Rat> {
    check(frame, f)?;
    let mut acc = Rat::zero();
    for (i, &(n, k)) in frame.slots.iter().enumerate() {
        let diff = &f[i] - coord(frame, f, n + 1, k) * Rat::int(2);
        if !diff.is_zero() {
            acc += &(weight(n + 1, k) * diff.square());
        }
    }
    Ok(acc)
}

/// `α(f)² = Σ 2^(-4π⁻¹(n,k)) |e*_(n,k)(f)|²`.
pub fn alpha_sq(frame: &EmbeddingFrame, f: &[Rat]) -> Result<Rat> {
    check(frame, f)?;
    let mut acc = Rat::zero();
    for (i, &(n, k)) in frame.slots.iter().enumerate() {
        if !f[i].is_zero() {
            acc += &(weight(n, k) * f[i].square());
        }
    }
    Ok(acc)
}

/// `e*_(n,k)(f) = 2 e*_(n+1,k)(f)` for every slot of the frame.
pub fn beta_relations_hold(frame: &EmbeddingFrame, f: &[Rat]) -> Result<bool> {
    check(frame, f)?;
    Ok(frame
        .slots
        .iter()
        .enumerate()
        .all(|(i, &(n, k))| f[i] == coord(frame, f, n + 1, k) * Rat::int(2)))
}

/// `‖f‖_I² = ‖f‖² + β(f)²/2^7`.
pub fn norm_i_sq(frame: &EmbeddingFrame, f: &[Rat]) -> Result<Rat> {
    Ok(frame.f_norm(f)?.square() + beta_sq(frame, f)? * Rat::pow2(-7))
}

fn rho_body() -> &'static HullBody {
    static BODY: OnceLock<HullBody> = OnceLock::new();
    BODY.get_or_init(HullBody::cube_and_sphere)
}

/// `ρ₀`: gauge of `co({±1}³ ∪ √2·B)`, exact.
pub fn rho0_exact(r: &Rat, s: &Rat, t: &Rat) -> QuadSurd {
    rho_body().gauge_exact(&[r.clone(), s.clone(), t.clone()]).expect("dimension 3")
}

/// `ρ(r,s,t) = (|r| + |s|)/4 + ρ₀(r,s,t)/2`, exact.
pub fn rho_exact(r: &Rat, s: &Rat, t: &Rat) -> QuadSurd {
    rho0_exact(r, s, t).scale(&Rat::new(1, 2)).add_rat(&((r.abs() + s.abs()) * Rat::new(1, 4)))
}

fn check_eps(eps: &Rat) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    Ok(())
}

/// Enclosure of `ρ(r,s,t)` with width at most `eps`.
pub fn rho(r: &Rat, s: &Rat, t: &Rat, eps: &Rat) -> Result<CertInterval> {
    check_eps(eps)?;
    Ok(rho_exact(r, s, t).enclose(eps))
}

/// Enclosure of `ρ` over a box of arguments in the closed positive
/// octant, using coordinatewise monotonicity there.
pub fn rho_box(r: &CertInterval, s: &CertInterval, t: &CertInterval, eps: &Rat) -> Result<CertInterval> {
    check_eps(eps)?;
    for iv in [r, s, t] {
        if iv.lo.is_negative() {
            return Err(Error::InvalidArgument("rho_box needs nonnegative arguments".into()));
        }
    }
    let half = eps * Rat::new(1, 2);
    let lo = rho_exact(&r.lo, &s.lo, &t.lo).enclose(&half).lo;
    let hi = rho_exact(&r.hi, &s.hi, &t.hi).enclose(&half).hi;
    CertInterval::new(lo, hi)
}

/// Enclosure of `sqrt(v)` of width at most `eps` on a dyadic grid.
fn sqrt_enclosure(v: &Rat, eps: &Rat) -> CertInterval {
    let (lo, hi) = v.sqrt_bounds(eps);
    CertInterval { lo, hi }
}

/// `‖f‖_II = ρ(‖f‖, ‖f‖_I, α(f))`, enclosed with width at most `eps`.
pub fn norm_ii(frame: &EmbeddingFrame, f: &[Rat], eps: &Rat) -> Result<CertInterval> {
    check_eps(eps)?;
    let n = frame.f_norm(f)?;
    norm_ii_from_parts(&n, &norm_i_sq(frame, f)?, &alpha_sq(frame, f)?, eps)
}

/// `ρ(n, sqrt(i_sq), sqrt(a_sq))` enclosed with width at most `eps`.
pub fn norm_ii_from_parts(n: &Rat, i_sq: &Rat, a_sq: &Rat, eps: &Rat) -> Result<CertInterval> {
    // ρ is 3/4-Lipschitz for the max norm of its arguments
    let arg_eps = eps * Rat::new(1, 2);
    let s = sqrt_enclosure(i_sq, &arg_eps);
    let t = sqrt_enclosure(a_sq, &arg_eps);
    if s.is_point() && t.is_point() {
        return rho(n, &s.lo, &t.lo, eps);
    }
    rho_box(&CertInterval::point(n.clone()), &s, &t, &(eps * Rat::new(1, 4)))
}

/// Exact test of `sqrt(a) >= sqrt(b) + sqrt(c)` for nonnegative rationals.
pub fn sqrt_sum_le(b: &Rat, c: &Rat, a: &Rat) -> bool {
    // a >= b + c + 2 sqrt(bc)
    let lhs = a - b - c;
    if lhs.is_negative() {
        return false;
    }
    lhs.square() >= b * c * Rat::int(4)
}

/// Outcome of one inequality check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub holds: bool,
    /// Enclosure of `lhs - rhs`.
    pub slack: CertInterval,
}

/// `‖f‖_I - ‖P_d f‖_I - 2^-(2d+7)‖f - P_d f‖_I >= 0`, decided exactly.
pub fn furthlemma_i(frame: &EmbeddingFrame, f: &[Rat], d: usize) -> Result<InequalityCheck> {
    check_level(frame, d)?;
    let p = space::partial_sum(d, f)?;
    let tail = linalg::sub(f, &p);
    let a = norm_i_sq(frame, f)?;
    let b = norm_i_sq(frame, &p)?;
    let c = norm_i_sq(frame, &tail)? * Rat::pow2(-2 * (2 * d as i64 + 7));
    let holds = sqrt_sum_le(&b, &c, &a);
    let eps = Rat::pow2(-80);
    let slack = sqrt_enclosure(&a, &eps).sub(&sqrt_enclosure(&b, &eps)).sub(&sqrt_enclosure(&c, &eps));
    Ok(InequalityCheck { holds, slack })
}

fn check_level(frame: &EmbeddingFrame, d: usize) -> Result<()> {
    if d == 0 || d >= frame.depth {
        return Err(Error::OutOfRange(format!("d = {d} must satisfy 1 <= d < {}", frame.depth)));
    }
    Ok(())
}

/// Smallest enclosure width tried before giving up.
pub const MIN_EPS_BITS: i64 = 200;

/// `‖f‖_II - ‖P_d f‖_II - 2^-(2d+7)‖f - P_d f‖_II >= 0`, with enclosures
/// tightened until the sign is decided; the returned slack enclosure has
/// width at most `eps`.
pub fn furthlemma_ii(frame: &EmbeddingFrame, f: &[Rat], d: usize, eps: &Rat) -> Result<InequalityCheck> {
    check_level(frame, d)?;
    check_eps(eps)?;
    let p = space::partial_sum(d, f)?;
    let tail = linalg::sub(f, &p);
    let c = Rat::pow2(-(2 * d as i64 + 7));
    if linalg::is_zero(&tail) {
        // both sides equal ‖f‖_II
        return Ok(InequalityCheck { holds: true, slack: CertInterval::point(Rat::zero()) });
    }
    let parts = |g: &[Rat]| -> Result<(Rat, Rat, Rat)> {
        Ok((frame.f_norm(g)?, norm_i_sq(frame, g)?, alpha_sq(frame, g)?))
    };
    let pf = parts(f)?;
    let pp = parts(&p)?;
    let pt = parts(&tail)?;
    let mut e = eps.clone();
    loop {
        let q = &e * Rat::new(1, 4);
        let a = norm_ii_from_parts(&pf.0, &pf.1, &pf.2, &q)?;
        let b = norm_ii_from_parts(&pp.0, &pp.1, &pp.2, &q)?;
        let t = norm_ii_from_parts(&pt.0, &pt.1, &pt.2, &q)?.scale(&c);
        let slack = a.sub(&b).sub(&t);
        if !slack.lo.is_negative() {
            return Ok(InequalityCheck { holds: true, slack });
        }
        if slack.hi.is_negative() {
            return Ok(InequalityCheck { holds: false, slack });
        }
        e = &e * Rat::pow2(-16);
        if e < Rat::pow2(-MIN_EPS_BITS) {
            return Err(Error::Undecided(format!("furthlemma II at d = {d}: slack {slack:?}")));
        }
    }
}

/// `β(f)² <= 4·2^(-4d)‖f‖²` for `f` supported past coordinate `d`.
pub fn betabound(frame: &EmbeddingFrame, f: &[Rat], d: usize) -> Result<InequalityCheck> {
    if f.iter().take(d).any(|v| !v.is_zero()) {
        return Err(Error::Precondition(format!("vector is not supported past coordinate {d}")));
    }
    let lhs = beta_sq(frame, f)?;
    let rhs = frame.f_norm(f)?.square() * Rat::pow2(2 - 4 * d as i64);
    let diff = &rhs - &lhs;
    Ok(InequalityCheck { holds: !diff.is_negative(), slack: CertInterval::point(diff) })
}

/// `α(f)² < ‖f‖²` for nonzero `f`.
pub fn alphabound(frame: &EmbeddingFrame, f: &[Rat]) -> Result<InequalityCheck> {
    if linalg::is_zero(f) {
        return Err(Error::Precondition("vector must be nonzero".into()));
    }
    let diff = frame.f_norm(f)?.square() - alpha_sq(frame, f)?;
    Ok(InequalityCheck { holds: diff.is_positive(), slack: CertInterval::point(diff) })
}

/// `β(U x)` in the untruncated calculus: every difference term
/// `e*_(n,k)(Ux) - 2e*_(n+1,k)(Ux)` over the first `blocks` blocks, divided
/// by `√3/2`. All vanish exactly, so `β(Ux) = 0`.
pub fn u_image_beta_terms(x: &UImage, blocks: u64) -> Vec<Rat> {
    let m = x.x.len() as u64;
    let mut out = Vec::new();
    for n in 1..=blocks {
        for k in 1..=m {
            out.push(x.coordinate_over_half_sqrt3(n, k) - x.coordinate_over_half_sqrt3(n + 1, k) * Rat::int(2));
        }
    }
    out
}

/// Upper bound on `α(Ux)²`: `(3/4)(1/15) max_k |x_k|²`, from
/// `Σ_i 2^(-4i) = 1/15` and `|e*_(n,k)(Ux)| <= (√3/2)|x_k|`.
pub fn u_image_alpha_sq_bound(x: &UImage) -> Rat {
    let m = x.x.iter().map(Rat::square).max().unwrap_or_default();
    Rat::new(3, 4) * Rat::new(1, 15) * m
}

/// Which renorming a segment test addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    I,
    II,
}

impl std::str::FromStr for Which {
    type Err = Error;
    fn from_str(s: &str) -> Result<Which> {
        match s {
            "I" | "i" => Ok(Which::I),
            "II" | "ii" => Ok(Which::II),
            _ => Err(Error::Parse(format!("expected I or II, got {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentVerdict {
    /// Norm constant on `[u, v]`.
    pub constant: bool,
    /// When `constant`: whether the forced structure (`β` relations) holds.
    pub conclusion_holds: Option<bool>,
    pub detail: String,
}

/// Constancy of `‖·‖_I` or `‖·‖_II` on `[u, v] ⊂ F_D`, decided at the
/// midpoint. When constant, checks that `β(v - u) = 0` (I) or that `u`
/// and `v` satisfy the `β` relations (II); on `F_D` these force `u = v`.
pub fn segment_detector(frame: &EmbeddingFrame, u: &[Rat], v: &[Rat], which: Which, eps: &Rat) -> Result<SegmentVerdict> {
    if u == v {
        return Err(Error::Precondition("segment endpoints must differ".into()));
    }
    let mid = linalg::scale(&linalg::add(u, v), &Rat::new(1, 2));
    let constant = match which {
        Which::I => {
            let a = norm_i_sq(frame, u)?;
            a == norm_i_sq(frame, v)? && a == norm_i_sq(frame, &mid)?
        }
        Which::II => {
            let mut e = eps.clone();
            loop {
                let a = norm_ii(frame, u, &e)?;
                let b = norm_ii(frame, v, &e)?;
                let c = norm_ii(frame, &mid, &e)?;
                // convexity: ‖mid‖ <= max; constancy fails once a strict gap shows
                if c.hi < a.lo || c.hi < b.lo || a.hi < b.lo || b.hi < a.lo {
                    break false;
                }
                e = &e * Rat::pow2(-16);
                if e < Rat::pow2(-MIN_EPS_BITS) {
                    return Err(Error::Undecided("segment constancy, tighten eps".into()));
                }
            }
        }
    };
    if !constant {
        return Ok(SegmentVerdict { constant, conclusion_holds: None, detail: "strict midpoint drop".into() });
    }
    let holds = match which {
        Which::I => beta_sq(frame, &linalg::sub(v, u))?.is_zero(),
        Which::II => beta_relations_hold(frame, u)? && beta_relations_hold(frame, v)?,
    };
    Ok(SegmentVerdict { constant, conclusion_holds: Some(holds), detail: "constant at midpoint".into() })
}

/// Segment `[Ux, Uy]` in the untruncated calculus, where
/// `‖Uz‖_I = ‖Uz‖_II = ‖z‖_X`. Constancy reduces to `‖x‖ = ‖y‖ =
/// ‖(x+y)/2‖` in `X`; the conclusions are `β(U(y - x)) = 0` (I) and the
/// collapse `ρ(r, r, t) = r` for `α(Uz) < ‖z‖` at both endpoints (II).
pub fn u_image_segment(frame: &EmbeddingFrame, x: &[Rat], y: &[Rat], which: Which) -> Result<SegmentVerdict> {
    if x == y {
        return Err(Error::Precondition("segment endpoints must differ".into()));
    }
    let xb = frame.x_ball();
    let nx = xb.gauge(x)?;
    let ny = xb.gauge(y)?;
    let nm = xb.gauge(&linalg::scale(&linalg::add(x, y), &Rat::new(1, 2)))?;
    let constant = nx == ny && nx == nm;
    if !constant {
        return Ok(SegmentVerdict { constant, conclusion_holds: None, detail: "strict midpoint drop in X".into() });
    }
    let blocks = frame.depth as u64 + 1;
    let holds = match which {
        Which::I => {
            let diff = UImage { x: linalg::sub(y, x) };
            u_image_beta_terms(&diff, blocks).iter().all(Rat::is_zero)
        }
        Which::II => [x, y].iter().all(|z| {
            let img = UImage { x: z.to_vec() };
            let n = xb.gauge(z).expect("dimension");
            let collapse = rho_exact(&n, &n, &Rat::zero()).cmp_rat(&n) == Ordering::Equal;
            u_image_beta_terms(&img, blocks).iter().all(Rat::is_zero)
                && u_image_alpha_sq_bound(&img) < n.square()
                && collapse
        }),
    };
    Ok(SegmentVerdict { constant, conclusion_holds: Some(holds), detail: "constant on the U-image".into() })
}

/// `ρ(r, r, t) = r` whenever `|t| <= r`, exactly.
pub fn rho_collapses(r: &Rat, t: &Rat) -> bool {
    rho_exact(r, r, t).cmp_rat(&r.abs()) == Ordering::Equal
}

/// `c_n = 7/2^(2n+8)`.
pub fn b001_constant(n: usize) -> Rat {
    Rat::new(7, 1) * Rat::pow2(-(2 * n as i64 + 8))
}

/// Squared-form level gain
/// `‖P_n z‖_I² >= ‖P_{n-1} z‖_I² + c_n² |z_n|²` for `n = 1..=D`; returns
/// the first failing `n`.
pub fn b001_i(frame: &EmbeddingFrame, z: &[Rat]) -> Result<Option<usize>> {
    check(frame, z)?;
    let mut prev = Rat::zero();
    for n in 1..=frame.depth {
        let cur = norm_i_sq(frame, &space::partial_sum(n, z)?)?;
        if cur < &prev + b001_constant(n).square() * z[n - 1].square() {
            return Ok(Some(n));
        }
        prev = cur;
    }
    Ok(None)
}

/// As [`b001_i`] for `‖·‖_II`, with enclosures tightened until decisive.
pub fn b001_ii(frame: &EmbeddingFrame, z: &[Rat], eps: &Rat) -> Result<Option<usize>> {
    check(frame, z)?;
    let mut parts = Vec::with_capacity(frame.depth + 1);
    parts.push(None);
    for n in 1..=frame.depth {
        let p = space::partial_sum(n, z)?;
        parts.push(Some((frame.f_norm(&p)?, norm_i_sq(frame, &p)?, alpha_sq(frame, &p)?)));
    }
    for n in 1..=frame.depth {
        if z[n - 1].is_zero() {
            // P_n z = P_{n-1} z: equality
            continue;
        }
        let gain = b001_constant(n).square() * z[n - 1].square();
        let mut e = eps.clone();
        loop {
            let cur = parts[n].as_ref().expect("level");
            let cur = norm_ii_from_parts(&cur.0, &cur.1, &cur.2, &e)?.square_nonneg();
            let prev = match &parts[n - 1] {
                None => CertInterval::point(Rat::zero()),
                Some(p) => norm_ii_from_parts(&p.0, &p.1, &p.2, &e)?.square_nonneg(),
            };
            let rhs = prev.add_rat(&gain);
            if cur.lo >= rhs.hi {
                break;
            }
            if cur.hi < rhs.lo {
                return Ok(Some(n));
            }
            e = &e * Rat::pow2(-16);
            if e < Rat::pow2(-MIN_EPS_BITS) {
                return Err(Error::Undecided(format!("level gain at n = {n}")));
            }
        }
    }
    Ok(None)
}

/// Sandwich `‖f‖ <= ‖f‖_I <= 2‖f‖`, exact on squares.
pub fn renorm_i_sandwich(frame: &EmbeddingFrame, f: &[Rat]) -> Result<bool> {
    let n = frame.f_norm(f)?.square();
    let i = norm_i_sq(frame, f)?;
    Ok(n <= i && i <= n * Rat::int(4))
}

/// Sandwich `‖f‖ <= ‖f‖_II <= 2‖f‖` on an enclosure.
pub fn renorm_ii_sandwich(frame: &EmbeddingFrame, f: &[Rat], eps: &Rat) -> Result<bool> {
    let n = frame.f_norm(f)?;
    let iv = norm_ii(frame, f, eps)?;
    Ok(n <= iv.lo && iv.hi <= n * Rat::int(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{cached_frame, linf_plane, real_line};

    fn r(p: i64, q: i64) -> Rat {
        Rat::new(p, q)
    }

    #[test]
    fn beta_example() {
        let frame = cached_frame(&real_line(), 3).unwrap();
        // e*_(1,1) = 2, e*_(2,1) = 1
        let f = vec![Rat::int(2), Rat::one(), Rat::zero()];
        assert_eq!(beta_sq(&frame, &f).unwrap(), Rat::pow2(-24));
        assert_eq!(alpha_sq(&frame, &[Rat::int(3), Rat::zero(), Rat::zero()]).unwrap(), Rat::new(9, 16));
    }

    #[test]
    fn rho_anchors() {
        let eps = Rat::pow2(-30);
        assert!(rho(&r(1, 1), &r(1, 1), &r(1, 1), &eps).unwrap().contains(&Rat::one()));
        assert!(rho(&r(1, 1), &r(1, 1), &r(0, 1), &eps).unwrap().contains(&Rat::one()));
        let v = rho(&r(2, 1), &r(0, 1), &r(0, 1), &eps).unwrap();
        assert!(v.contains_f64(0.5 + 2f64.sqrt() / 2.0));
        assert_eq!(rho0_exact(&r(2, 1), &r(0, 1), &r(0, 1)).cmp_exact(&QuadSurd::sqrt(Rat::int(2))), Ordering::Equal);
        assert!(rho_collapses(&r(3, 2), &r(-1, 1)));
        assert!(!rho_collapses(&r(1, 1), &r(2, 1)));
    }

    #[test]
    fn sqrt_sum_comparison() {
        // sqrt(9) = sqrt(4) + sqrt(1)
        assert!(sqrt_sum_le(&Rat::int(4), &Rat::int(1), &Rat::int(9)));
        assert!(!sqrt_sum_le(&Rat::int(4), &Rat::int(2), &Rat::int(9)));
        assert!(sqrt_sum_le(&Rat::int(2), &Rat::int(2), &Rat::int(8)));
    }

    #[test]
    fn renorm_sandwiches_and_lemmas() {
        let frame = cached_frame(&real_line(), 3).unwrap();
        let eps = Rat::pow2(-34);
        let f = vec![r(1, 2), r(-2, 3), r(3, 4)];
        assert!(renorm_i_sandwich(&frame, &f).unwrap());
        assert!(renorm_ii_sandwich(&frame, &f, &eps).unwrap());
        for d in 1..3 {
            assert!(furthlemma_i(&frame, &f, d).unwrap().holds);
            let c = furthlemma_ii(&frame, &f, d, &eps).unwrap();
            assert!(c.holds && c.slack.width() <= eps);
        }
        assert!(betabound(&frame, &[Rat::zero(), r(1, 3), r(-1, 1)], 1).unwrap().holds);
        assert!(alphabound(&frame, &f).unwrap().holds);
        assert_eq!(b001_i(&frame, &f).unwrap(), None);
        assert_eq!(b001_ii(&frame, &f, &eps).unwrap(), None);
    }

    #[test]
    fn u_image_is_beta_null() {
        let x = UImage { x: vec![r(3, 5), r(-1, 2)] };
        assert!(u_image_beta_terms(&x, 6).iter().all(Rat::is_zero));
        assert!(u_image_alpha_sq_bound(&x) < Rat::new(9, 25));
    }

    #[test]
    fn flat_u_image_segment() {
        let frame = cached_frame(&linf_plane(), 3).unwrap();
        let x = vec![Rat::one(), Rat::zero()];
        let y = vec![Rat::one(), r(1, 2)];
        for which in [Which::I, Which::II] {
            let v = u_image_segment(&frame, &x, &y, which).unwrap();
            assert!(v.constant);
            assert_eq!(v.conclusion_holds, Some(true));
        }
        let v = segment_detector(&frame, &[Rat::one(), Rat::zero(), Rat::zero()], &[Rat::one(), r(1, 2), Rat::zero()], Which::I, &Rat::pow2(-20)).unwrap();
        assert!(!v.constant);
    }
}
