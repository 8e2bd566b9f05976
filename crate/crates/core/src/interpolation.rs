//! 2-interpolation of a pair `(X, W)`: level norms `‖·‖_n` with unit balls
//! `2^n W + 2^-n B_X` and the norm `(Σ_n ‖x‖_n²)^{1/2}`, truncated with
//! the tail bound `Σ_{n>N} ‖x‖_n² <= (4^-N / 3) gauge_W(x)²`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::CertInterval;
use crate::linalg::{self, RatVec};
use crate::lp;
use crate::polytope::PolytopeBall;
use crate::rat::Rat;
use crate::space::BasisSpace;
use crate::treespace::FiniteTree;

/// Levels kept in the per-spec cache.
pub const MAX_LEVEL: usize = 96;

#[derive(Clone, Debug)]
pub struct InterpolationSpec {
    pub x: BasisSpace,
    pub w: PolytopeBall,
    x_ball: PolytopeBall,
    levels: Arc<Vec<OnceLock<PolytopeBall>>>,
    /// `max g_W` over the generators of `B_X`, so `B_X ⊆ μ W`.
    mu: Arc<OnceLock<Rat>>,
}

impl InterpolationSpec {
    /// `X` must be a polytope space and `W` a full-dimensional ball of the
    /// same dimension.
    pub fn new(x: BasisSpace, w: PolytopeBall) -> Result<InterpolationSpec> {
        x.validate()?;
        let x_ball = x.ball().ok_or(Error::ExactNormRequired)?;
        if w.dim() != x.dim {
            return Err(Error::DimensionMismatch { expected: x.dim, got: w.dim() });
        }
        let levels = Arc::new((0..MAX_LEVEL).map(|_| OnceLock::new()).collect());
        Ok(InterpolationSpec { x, w, x_ball, levels, mu: Arc::default() })
    }

    pub fn dim(&self) -> usize {
        self.x.dim
    }

    pub fn x_ball(&self) -> &PolytopeBall {
        &self.x_ball
    }

    fn mu(&self) -> Result<&Rat> {
        if let Some(m) = self.mu.get() {
            return Ok(m);
        }
        let mut m = Rat::zero();
        for g in self.x_ball.generators() {
            m = m.max(self.w.gauge(g)?);
        }
        Ok(self.mu.get_or_init(|| m))
    }

    /// `2^n W + 2^-n B_X` as the unpruned set of pairwise sums.
    pub fn level_ball(&self, n: usize) -> Result<&PolytopeBall> {
        if n == 0 || n > MAX_LEVEL {
            return Err(Error::OutOfRange(format!("level {n} outside 1..={MAX_LEVEL}")));
        }
        Ok(self.levels[n - 1].get_or_init(|| {
            let s = Rat::pow2(n as i64);
            let t = Rat::pow2(-(n as i64));
            let mut pts = Vec::new();
            for a in self.w.generators() {
                let sa = linalg::scale(a, &s);
                for b in self.x_ball.symmetric_points() {
                    pts.push(linalg::add(&sa, &linalg::scale(&b, &t)));
                }
            }
            PolytopeBall::from_points_unpruned(self.dim(), pts).expect("B_X spans")
        }))
    }

    /// `‖x‖_n`, exact. Solved over the implicit sum columns unless the
    /// level ball has already been materialized.
    pub fn level_norm(&self, n: usize, x: &[Rat]) -> Result<Rat> {
        if n == 0 || n > MAX_LEVEL {
            return Err(Error::OutOfRange(format!("level {n} outside 1..={MAX_LEVEL}")));
        }
        if let Some(ball) = self.levels[n - 1].get() {
            return ball.gauge(x);
        }
        let cols = lp::MinkowskiColumns {
            a: self.w.generators(),
            b: self.x_ball.generators(),
            s: Rat::pow2(n as i64),
            t: Rat::pow2(-(n as i64)),
        };
        Ok(lp::gauge_over(&cols, x)?.value)
    }

    /// Enclosure of `(Σ_n ‖x‖_n²)^{1/2}` with width at most `eps`.
    pub fn interpolation_norm(&self, x: &[Rat], eps: &Rat) -> Result<CertInterval> {
        Ok(self.interpolation_norm_report(x, eps)?.value)
    }

    pub fn interpolation_norm_report(&self, x: &[Rat], eps: &Rat) -> Result<InterpolationValue> {
        if !eps.is_positive() {
            return Err(Error::InvalidArgument("eps must be positive".into()));
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if linalg::is_zero(x) {
            return Ok(InterpolationValue { value: CertInterval::point(Rat::zero()), levels: 0, tail_sq: Rat::zero() });
        }
        // Past level N, 2^-n g_W / (1 + 4^-n μ) <= ‖x‖_n <= 2^-n g_W, so the
        // squared tail lies in g_W² [4^-N/3 - 2μ 16^-N/15, 4^-N/3].
        let gw_sq = self.w.gauge(x)?.square();
        let mu = self.mu()?.clone();
        let q = eps * Rat::new(1, 4);
        let mut sum = Rat::zero();
        for n in 1..=MAX_LEVEL {
            sum += &self.level_norm(n, x)?.square();
            let n = n as i64;
            let tail_hi = &gw_sq * Rat::pow2(-2 * n) * Rat::new(1, 3);
            let tail_lo = (&tail_hi - &gw_sq * &mu * Rat::pow2(-4 * n) * Rat::new(2, 15)).max(Rat::zero());
            let (lo, _) = (&sum + &tail_lo).sqrt_bounds(&q);
            let (_, hi) = (&sum + &tail_hi).sqrt_bounds(&q);
            if &hi - &lo <= *eps {
                return Ok(InterpolationValue { value: CertInterval { lo, hi }, levels: n as usize, tail_sq: tail_hi });
            }
        }
        Err(Error::ResourceGuard(format!("interpolation norm needs more than {MAX_LEVEL} levels")))
    }

    /// `P B_X ⊆ B_X` and `P W ⊆ W` for the coordinate projection keeping
    /// `coords`; together they give `P B_n ⊆ B_n` at every level.
    pub fn projection_preconditions(&self, coords: &[usize]) -> Result<(bool, bool)> {
        let keep = |g: &RatVec| -> RatVec {
            g.iter().enumerate().map(|(i, v)| if coords.contains(&i) { v.clone() } else { Rat::zero() }).collect()
        };
        let mut x_ok = true;
        for g in self.x_ball.generators() {
            if !self.x_ball.contains(&keep(g))? {
                x_ok = false;
                break;
            }
        }
        let mut w_ok = true;
        for g in self.w.generators() {
            if !self.w.contains(&keep(g))? {
                w_ok = false;
                break;
            }
        }
        Ok((x_ok, w_ok))
    }

    /// `P W = P B_X` on the range of `P`, by comparing the projected
    /// polytopes.
    pub fn projected_balls_agree(&self, coords: &[usize]) -> Result<bool> {
        self.w.project(coords)?.same_norm(&self.x_ball.project(coords)?)
    }

    /// Contraction and scale-law checks for the projection `P` keeping `coords`.
    pub fn verify_interpproj(&self, coords: &[usize], samples: &[RatVec], levels: usize, eps: &Rat) -> Result<InterpProjReport> {
        let (x_ok, w_ok) = self.projection_preconditions(coords)?;
        if !(x_ok && w_ok) {
            return Ok(InterpProjReport {
                preconditions: false,
                contraction_failures: Vec::new(),
                scale_law: None,
                ratios: Vec::new(),
                constant: scale_constant(eps),
            });
        }
        let proj = |x: &[Rat]| -> RatVec {
            x.iter().enumerate().map(|(i, v)| if coords.contains(&i) { v.clone() } else { Rat::zero() }).collect()
        };
        let mut failures = Vec::new();
        for (k, x) in samples.iter().enumerate() {
            let px = proj(x);
            for n in 1..=levels {
                if self.level_norm(n, &px)? > self.level_norm(n, x)? {
                    failures.push(k);
                    break;
                }
            }
        }
        let agree = self.projected_balls_agree(coords)?;
        let mut ratios = Vec::new();
        let mut law = None;
        if agree {
            let mut ok = true;
            for x in samples {
                let px = proj(x);
                if linalg::is_zero(&px) {
                    continue;
                }
                let nx = self.x_ball.gauge(&px)?;
                for n in 1..=levels {
                    let scale = Rat::pow2(n as i64) + Rat::pow2(-(n as i64));
                    if self.level_norm(n, &px)? * scale != nx {
                        ok = false;
                    }
                }
                let v = self.interpolation_norm(&px, &(eps * &nx))?;
                ratios.push(v.scale(&nx.recip()));
            }
            law = Some(ok);
        }
        Ok(InterpProjReport {
            preconditions: true,
            contraction_failures: failures,
            scale_law: law,
            ratios,
            constant: scale_constant(eps),
        })
    }
}

/// Enclosure of `c = (Σ_{n>=1} (2^n + 2^-n)^-2)^{1/2}` of width at most
/// `eps`, from the partial sums and `Σ_{n>N} (2^n + 2^-n)^-2 <= 4^-N / 3`.
pub fn scale_constant(eps: &Rat) -> CertInterval {
    let q = eps * Rat::new(1, 4);
    let mut sum = Rat::zero();
    let mut n = 1i64;
    loop {
        let t = Rat::pow2(n) + Rat::pow2(-n);
        sum += &t.square().recip();
        let tail = Rat::pow2(-2 * n) * Rat::new(1, 3);
        let (lo, _) = sum.sqrt_bounds(&q);
        let (_, hi) = (&sum + &tail).sqrt_bounds(&q);
        if &hi - &lo <= *eps {
            return CertInterval { lo, hi };
        }
        n += 1;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterpolationValue {
    pub value: CertInterval,
    pub levels: usize,
    /// Upper bound on the omitted squared tail.
    pub tail_sq: Rat,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterpProjReport {
    /// `P B_X ⊆ B_X` and `P W ⊆ W`.
    pub preconditions: bool,
    /// Samples where some level norm grew under `P`.
    pub contraction_failures: Vec<usize>,
    /// Exact per-level law `‖Px‖_n (2^n + 2^-n) = ‖Px‖`, checked when
    /// `P W = P B_X`.
    pub scale_law: Option<bool>,
    /// Enclosures of the norm ratio on the range of `P`.
    pub ratios: Vec<CertInterval>,
    pub constant: CertInterval,
}

impl InterpProjReport {
    /// Every ratio enclosure meets the enclosure of the series constant.
    pub fn ratios_match(&self) -> bool {
        self.ratios.iter().all(|r| r.intersects(&self.constant))
    }
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    x: BasisSpace,
    w: PolytopeBall,
}

impl Serialize for InterpolationSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecDoc { x: self.x.clone(), w: self.w.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InterpolationSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<InterpolationSpec, D::Error> {
        let doc = SpecDoc::deserialize(d)?;
        InterpolationSpec::new(doc.x, doc.w).map_err(serde::de::Error::custom)
    }
}

/// `(E, co Φ)` for a tree with polytope branch norms.
pub fn build_a(tree: &FiniteTree) -> Result<InterpolationSpec> {
    let e = tree.e_ball()?;
    let spec = InterpolationSpec::new(BasisSpace::polytope(e), tree.phi_ball()?)?;
    // initial node segments are subtrees; P_k W ⊆ W and P_k B_E ⊆ B_E make
    // the node basis monotone at every level
    for k in 1..tree.node_count() {
        let coords: Vec<usize> = (0..k).collect();
        let (x_ok, w_ok) = spec.projection_preconditions(&coords)?;
        if !(x_ok && w_ok) {
            return Err(Error::Precondition(format!("partial projection P_{k} is not contractive")));
        }
    }
    Ok(spec)
}

/// Interpolation of `R` with itself (`W = B_X = [-1, 1]`).
pub fn line_spec() -> InterpolationSpec {
    let seg = PolytopeBall::new(1, vec![vec![Rat::one()]]).expect("segment");
    InterpolationSpec::new(BasisSpace::polytope(seg.clone()), seg).expect("line")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_c() -> f64 {
        (1..=60).map(|n| (2f64.powi(n) + 2f64.powi(-n)).powi(-2)).sum::<f64>().sqrt()
    }

    #[test]
    fn line_levels() {
        let spec = line_spec();
        for n in 1..6 {
            let s = Rat::pow2(n as i64) + Rat::pow2(-(n as i64));
            assert_eq!(spec.level_norm(n, &[Rat::int(3)]).unwrap(), Rat::int(3) / s);
        }
        let half = PolytopeBall::new(1, vec![vec![Rat::new(1, 2)]]).unwrap();
        let spec2 = InterpolationSpec::new(spec.x.clone(), half).unwrap();
        for n in 1..6 {
            let s = Rat::pow2(n as i64 - 1) + Rat::pow2(-(n as i64));
            assert_eq!(spec2.level_norm(n, &[Rat::one()]).unwrap(), s.recip());
        }
    }

    #[test]
    fn line_constant() {
        let eps = Rat::new(1, 1_000_000_000_000);
        let c = scale_constant(&eps);
        assert!((c.midpoint().to_f64() - oracle_c()).abs() < 1e-9);
        let v = line_spec().interpolation_norm(&[Rat::int(2)], &eps).unwrap();
        assert!((v.midpoint().to_f64() - 2.0 * oracle_c()).abs() < 1e-9);
        assert!((oracle_c() - 0.485476).abs() < 1e-6);
    }

    #[test]
    fn zero_vector() {
        let v = line_spec().interpolation_norm(&[Rat::zero()], &Rat::pow2(-10)).unwrap();
        assert!(v.is_point() && v.lo.is_zero());
    }

    #[test]
    fn two_sided_tail_is_sound() {
        let v = |a: i64, b: i64| vec![Rat::int(a), Rat::int(b)];
        let x = BasisSpace::polytope(PolytopeBall::new(2, vec![v(1, 0), v(0, 1), v(1, 1)]).unwrap());
        let w = PolytopeBall::new(2, vec![vec![Rat::new(1, 5), Rat::zero()], vec![Rat::zero(), Rat::new(1, 3)]]).unwrap();
        let spec = InterpolationSpec::new(x, w).unwrap();
        let p = v(3, -2);
        // 40 explicit levels; the remaining tail is below 4^-40 g_W²
        let sum: Rat = (1..=40).map(|n| spec.level_norm(n, &p).unwrap().square()).sum();
        let tail = spec.w.gauge(&p).unwrap().square() * Rat::pow2(-80);
        let (lo, _) = sum.sqrt_bounds(&Rat::pow2(-60));
        let (_, hi) = (&sum + &tail).sqrt_bounds(&Rat::pow2(-60));
        for k in [4, 8, 16, 30] {
            let coarse = spec.interpolation_norm(&p, &Rat::pow2(-k)).unwrap();
            assert!(coarse.lo <= lo && hi <= coarse.hi, "k = {k}: {coarse:?} misses [{lo}, {hi}]");
        }
    }
}
