//! Finite-dimensional spaces with a distinguished basis and a composable
//! norm expression.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::embedding::{self, EmbeddingFrame};
use crate::error::{Error, Result};
use crate::interpolation::InterpolationSpec;
use crate::interval::CertInterval;
use crate::linalg::{self, RatVec};
use crate::polytope::PolytopeBall;
use crate::rat::Rat;
use crate::renorming;
use crate::treespace::FiniteTree;

/// Value of a norm: exact rational, exact square root of a rational, or a
/// certified enclosure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormValue {
    Exact(Rat),
    /// `sqrt` of the stored nonnegative rational.
    Sqrt(Rat),
    Enclosure(CertInterval),
}

impl NormValue {
    /// `Sqrt` collapsed to `Exact` when the radicand is a rational square.
    pub fn from_square(sq: Rat) -> NormValue {
        match sq.exact_sqrt() {
            Some(r) => NormValue::Exact(r),
            None => NormValue::Sqrt(sq),
        }
    }

    /// Exact square when known.
    pub fn square(&self) -> Option<Rat> {
        match self {
            NormValue::Exact(r) => Some(r.square()),
            NormValue::Sqrt(s) => Some(s.clone()),
            NormValue::Enclosure(iv) if iv.is_point() => Some(iv.lo.square()),
            NormValue::Enclosure(_) => None,
        }
    }

    pub fn exact(&self) -> Option<Rat> {
        match self {
            NormValue::Exact(r) => Some(r.clone()),
            NormValue::Sqrt(s) => s.exact_sqrt(),
            NormValue::Enclosure(iv) if iv.is_point() => Some(iv.lo.clone()),
            NormValue::Enclosure(_) => None,
        }
    }

    pub fn enclose(&self, eps: &Rat) -> CertInterval {
        match self {
            NormValue::Exact(r) => CertInterval::point(r.clone()),
            NormValue::Sqrt(s) => {
                let (lo, hi) = s.sqrt_bounds(eps);
                CertInterval { lo, hi }
            }
            NormValue::Enclosure(iv) => iv.clone(),
        }
    }

    /// Enclosure of the square.
    pub fn square_enclosure(&self) -> CertInterval {
        match self.square() {
            Some(s) => CertInterval::point(s),
            None => self.enclose(&Rat::one()).square_nonneg(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            NormValue::Exact(r) => r.to_f64(),
            NormValue::Sqrt(s) => s.to_f64().sqrt(),
            NormValue::Enclosure(iv) => iv.midpoint().to_f64(),
        }
    }

    /// Decided comparison, if possible.
    pub fn certain_cmp(&self, other: &NormValue) -> Option<Ordering> {
        match (self.square(), other.square()) {
            (Some(a), Some(b)) => Some(a.cmp(&b)),
            _ => {
                let eps = Rat::pow2(-40);
                self.enclose(&eps).certain_cmp(&other.enclose(&eps))
            }
        }
    }

    /// Maximum of values; exact when all are exact squares.
    pub fn max_of(values: &[NormValue]) -> NormValue {
        if values.iter().all(|v| v.square().is_some()) {
            let best = values
                .iter()
                .max_by(|a, b| a.square().cmp(&b.square()))
                .cloned()
                .unwrap_or(NormValue::Exact(Rat::zero()));
            return best;
        }
        let eps = Rat::pow2(-60);
        let ivs: Vec<CertInterval> = values.iter().map(|v| v.enclose(&eps)).collect();
        let lo = ivs.iter().map(|i| i.lo.clone()).max().unwrap_or_default();
        let hi = ivs.iter().map(|i| i.hi.clone()).max().unwrap_or_default();
        NormValue::Enclosure(CertInterval { lo, hi })
    }
}

/// Composition tree of norm constructions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormExpr {
    /// Gauge of a rational polytope.
    Polytope { ball: PolytopeBall },
    /// Euclidean norm.
    Euclidean { dim: usize },
    /// `ℓ₂(X)` restricted to the first `dim` coordinates of the frame
    /// identification.
    L2Sum { base: Box<BasisSpace>, dim: usize },
    /// The amalgamated norm `‖·‖` of an embedding frame.
    Frame { frame: Arc<EmbeddingFrame> },
    /// `‖·‖_I` over a frame.
    RenormI { frame: Arc<EmbeddingFrame> },
    /// `‖·‖_II` over a frame, evaluated to width `eps`.
    RenormII { frame: Arc<EmbeddingFrame>, eps: Rat },
    /// Supremum over branches.
    TreeE { tree: Arc<FiniteTree> },
    /// Supremum over branches with the off-branch quadratic term.
    TreeB { tree: Arc<FiniteTree> },
    /// 2-interpolation norm, evaluated to width `eps`.
    Interpolation { spec: Arc<InterpolationSpec>, eps: Rat },
}

impl NormExpr {
    pub fn dim(&self) -> usize {
        match self {
            NormExpr::Polytope { ball } => ball.dim(),
            NormExpr::Euclidean { dim } => *dim,
            NormExpr::L2Sum { dim, .. } => *dim,
            NormExpr::Frame { frame } | NormExpr::RenormI { frame } | NormExpr::RenormII { frame, .. } => {
                frame.depth
            }
            NormExpr::TreeE { tree } | NormExpr::TreeB { tree } => tree.node_count(),
            NormExpr::Interpolation { spec, .. } => spec.dim(),
        }
    }

    /// Polytope-only expressions evaluate to exact rationals.
    pub fn is_exact(&self) -> bool {
        matches!(self, NormExpr::Polytope { .. } | NormExpr::Frame { .. })
            || matches!(self, NormExpr::TreeE { tree } if tree.all_branches_polytope())
    }

    /// Unit ball when the norm is a polytope gauge.
    pub fn as_polytope(&self) -> Option<PolytopeBall> {
        match self {
            NormExpr::Polytope { ball } => Some(ball.clone()),
            NormExpr::Frame { frame } => Some(frame.f_ball().clone()),
            NormExpr::TreeE { tree } => tree.e_ball().ok(),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[Rat]) -> Result<NormValue> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        match self {
            NormExpr::Polytope { ball } => Ok(NormValue::Exact(ball.gauge(x)?)),
            NormExpr::Euclidean { .. } => Ok(NormValue::from_square(linalg::norm2_sq(x))),
            NormExpr::L2Sum { base, dim } => embedding::l2x_norm_space(base, *dim, x),
            NormExpr::Frame { frame } => Ok(NormValue::Exact(frame.f_norm(x)?)),
            NormExpr::RenormI { frame } => Ok(NormValue::from_square(renorming::norm_i_sq(frame, x)?)),
            NormExpr::RenormII { frame, eps } => Ok(NormValue::Enclosure(renorming::norm_ii(frame, x, eps)?)),
            NormExpr::TreeE { tree } => tree.e_norm(x),
            NormExpr::TreeB { tree } => Ok(tree.b_norm(x)?.value),
            NormExpr::Interpolation { spec, eps } => {
                Ok(NormValue::Enclosure(spec.interpolation_norm(x, eps)?))
            }
        }
    }
}

impl NormExpr {
    /// As [`eval`](NormExpr::eval), with enclosing nodes evaluated to
    /// width `eps` instead of their stored width.
    pub fn eval_eps(&self, x: &[Rat], eps: &Rat) -> Result<NormValue> {
        match self {
            NormExpr::RenormII { frame, .. } => {
                NormExpr::RenormII { frame: frame.clone(), eps: eps.clone() }.eval(x)
            }
            NormExpr::Interpolation { spec, .. } => {
                NormExpr::Interpolation { spec: spec.clone(), eps: eps.clone() }.eval(x)
            }
            other => other.eval(x),
        }
    }
}

/// Canonical description of the restriction of a norm to the span of the
/// first `k` basis vectors, used for 1-equivalence decisions.
#[derive(Clone, Debug)]
pub enum SectionForm {
    Polytope(PolytopeBall),
    Euclidean(usize),
}

impl SectionForm {
    pub fn same(&self, other: &SectionForm) -> Result<bool> {
        match (self, other) {
            (SectionForm::Euclidean(a), SectionForm::Euclidean(b)) => Ok(a == b),
            (SectionForm::Polytope(a), SectionForm::Polytope(b)) => a.same_norm(b),
            _ => Ok(false),
        }
    }
}

/// Finite-dimensional space with ordered basis `e_1..e_dim`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisSpace {
    pub dim: usize,
    pub norm: NormExpr,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl BasisSpace {
    pub fn new(norm: NormExpr) -> BasisSpace {
        BasisSpace { dim: norm.dim(), norm, tags: Vec::new() }
    }

    pub fn polytope(ball: PolytopeBall) -> BasisSpace {
        BasisSpace::new(NormExpr::Polytope { ball })
    }

    pub fn euclidean(dim: usize) -> BasisSpace {
        BasisSpace::new(NormExpr::Euclidean { dim })
    }

    pub fn with_tags(mut self, tags: &[&str]) -> BasisSpace {
        self.tags = tags.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Checks the declared dimension against the expression.
    pub fn validate(&self) -> Result<()> {
        if self.dim != self.norm.dim() {
            return Err(Error::DimensionMismatch { expected: self.norm.dim(), got: self.dim });
        }
        Ok(())
    }

    pub fn eval_norm(&self, x: &[Rat]) -> Result<NormValue> {
        self.norm.eval(x)
    }

    pub fn is_exact(&self) -> bool {
        self.norm.is_exact()
    }

    pub fn ball(&self) -> Option<PolytopeBall> {
        self.norm.as_polytope()
    }

    /// `P_n x`: keep the first `n` coordinates.
    pub fn partial_sum(&self, n: usize, x: &[Rat]) -> Result<RatVec> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        partial_sum(n, x)
    }

    /// Exact monotonicity decision; on failure a vector `x` and `n` with
    /// `‖P_n x‖ > ‖x‖`.
    pub fn is_monotone(&self) -> Result<(bool, Option<(usize, RatVec)>)> {
        let ball = self.ball().ok_or(Error::ExactNormRequired)?;
        let w = polytope_monotone_witness(&ball)?;
        Ok((w.is_none(), w))
    }

    pub fn section_form(&self, k: usize) -> Result<SectionForm> {
        if k == 0 || k > self.dim {
            return Err(Error::OutOfRange(format!("section size {k} for dimension {}", self.dim)));
        }
        match &self.norm {
            NormExpr::Euclidean { .. } if k >= 2 => Ok(SectionForm::Euclidean(k)),
            NormExpr::Euclidean { .. } => {
                Ok(SectionForm::Polytope(PolytopeBall::new(1, vec![vec![Rat::one()]])?))
            }
            other => {
                let ball = other.as_polytope().ok_or(Error::ExactNormRequired)?;
                Ok(SectionForm::Polytope(ball.section(k)?))
            }
        }
    }

    /// Norms of `a` and `b` agree on the span of the first `k` basis vectors.
    pub fn one_equivalent(a: &BasisSpace, b: &BasisSpace, k: usize) -> Result<bool> {
        if k > a.dim.min(b.dim) {
            return Err(Error::OutOfRange(format!("k = {k} exceeds a dimension")));
        }
        a.section_form(k)?.same(&b.section_form(k)?)
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

pub fn partial_sum(n: usize, x: &[Rat]) -> Result<RatVec> {
    if n > x.len() {
        return Err(Error::OutOfRange(format!("partial sum index {n} for dimension {}", x.len())));
    }
    let mut out = x.to_vec();
    for v in out.iter_mut().skip(n) {
        *v = Rat::zero();
    }
    Ok(out)
}

/// `e*_i(x) = x_i` (1-based).
pub fn coordinate_functional(i: usize, x: &[Rat]) -> Result<Rat> {
    if i == 0 || i > x.len() {
        return Err(Error::OutOfRange(format!("coordinate {i} for dimension {}", x.len())));
    }
    Ok(x[i - 1].clone())
}

/// `None` when every projected generator stays in the ball; otherwise the
/// first `(n, generator)` whose projection `P_n g` leaves it.
pub fn polytope_monotone_witness(ball: &PolytopeBall) -> Result<Option<(usize, RatVec)>> {
    let d = ball.dim();
    for n in 1..d {
        for g in ball.generators() {
            let p = partial_sum(n, g)?;
            if !ball.contains(&p)? {
                return Ok(Some((n, g.clone())));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    fn square() -> BasisSpace {
        BasisSpace::polytope(PolytopeBall::new(2, vec![v(&[1, 1]), v(&[1, -1])]).unwrap())
    }

    fn diamond() -> BasisSpace {
        BasisSpace::polytope(PolytopeBall::new(2, vec![v(&[1, 0]), v(&[0, 1])]).unwrap())
    }

    #[test]
    fn eval_and_partial_sums() {
        assert_eq!(square().eval_norm(&v(&[2, 1])).unwrap(), NormValue::Exact(Rat::int(2)));
        assert_eq!(square().eval_norm(&v(&[0, 0])).unwrap(), NormValue::Exact(Rat::zero()));
        assert_eq!(partial_sum(2, &v(&[3, 5, 7])).unwrap(), v(&[3, 5, 0]));
        assert_eq!(partial_sum(0, &v(&[3, 5, 7])).unwrap(), v(&[0, 0, 0]));
        assert!(partial_sum(4, &v(&[3, 5, 7])).is_err());
        assert_eq!(coordinate_functional(2, &v(&[3, 5, 7])).unwrap(), Rat::int(5));
    }

    #[test]
    fn monotonicity() {
        assert!(square().is_monotone().unwrap().0);
        assert!(diamond().is_monotone().unwrap().0);
        let skew = BasisSpace::polytope(PolytopeBall::new(2, vec![v(&[2, 1]), v(&[0, 1])]).unwrap());
        let (ok, w) = skew.is_monotone().unwrap();
        assert!(!ok);
        assert_eq!(w.unwrap(), (1, v(&[2, 1])));
        assert!(BasisSpace::euclidean(2).is_monotone().is_err());
    }

    #[test]
    fn equivalence() {
        assert!(BasisSpace::one_equivalent(&square(), &diamond(), 1).unwrap());
        assert!(!BasisSpace::one_equivalent(&square(), &diamond(), 2).unwrap());
        assert!(BasisSpace::one_equivalent(&square(), &square(), 2).unwrap());
        assert!(BasisSpace::one_equivalent(&BasisSpace::euclidean(3), &diamond(), 1).unwrap());
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_value(square()).unwrap();
        assert_eq!(s["norm"]["kind"], "polytope");
        let back: BasisSpace = serde_json::from_value(s).unwrap();
        assert_eq!(back.dim, 2);
    }
}
