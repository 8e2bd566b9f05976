//! Symmetric rational polytopes `co{±g}` as unit balls of norms.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::hrep;
use crate::linalg::{self, RatVec};
use crate::lp::{self, GaugeSolution};
use crate::rat::Rat;

/// Unit ball `co{±g : g in generators}` of a norm on `R^dim`.
///
/// Generators are kept sign-normalized (first nonzero coordinate positive)
/// and sorted lexicographically by value. Balls built through [`new`]
/// are additionally pruned to their extreme points, which makes the
/// generator list a canonical form of the norm.
///
/// [`new`]: PolytopeBall::new
#[derive(Clone)]
pub struct PolytopeBall {
    dim: usize,
    generators: Vec<RatVec>,
    hrep: Arc<OnceLock<Vec<RatVec>>>,
    int_rows: Arc<OnceLock<Vec<IntRow>>>,
}

/// Facet row `a / scale` with integer `a` and positive integer `scale`.
struct IntRow {
    a: Vec<BigInt>,
    scale: BigInt,
}

fn int_rows(rows: &[RatVec]) -> Vec<IntRow> {
    rows.iter()
        .map(|row| {
            let scale = row.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
            let a = row.iter().map(|v| v.numer() * (&scale / v.denom())).collect();
            IntRow { a, scale }
        })
        .collect()
}

impl std::fmt::Debug for PolytopeBall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolytopeBall")
            .field("dim", &self.dim)
            .field("generators", &self.generators)
            .finish()
    }
}

impl PartialEq for PolytopeBall {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.generators == other.generators
    }
}

impl Eq for PolytopeBall {}

fn canonical_list(dim: usize, gens: &[RatVec]) -> Result<Vec<RatVec>> {
    for g in gens {
        if g.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: g.len() });
        }
    }
    Ok(hrep::dedup_rows(gens))
}

impl PolytopeBall {
    /// Canonical ball from arbitrary generators: rejects non-spanning sets,
    /// drops duplicates and non-extreme points.
    pub fn new(dim: usize, gens: Vec<RatVec>) -> Result<PolytopeBall> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let list = canonical_list(dim, &gens)?;
        if linalg::rank(&list) < dim {
            return Err(Error::NotANorm(dim));
        }
        let keep = prune_redundant(&list);
        Ok(PolytopeBall { dim, generators: keep, hrep: Arc::default(), int_rows: Arc::default() })
    }

    /// Ball from points already known to be extreme; only sign-normalizes,
    /// deduplicates, sorts and checks spanning.
    pub fn from_points_unpruned(dim: usize, gens: Vec<RatVec>) -> Result<PolytopeBall> {
        let list = canonical_list(dim, &gens)?;
        if linalg::rank(&list) < dim {
            return Err(Error::NotANorm(dim));
        }
        Ok(PolytopeBall { dim, generators: list, hrep: Arc::default(), int_rows: Arc::default() })
    }

    /// Ball given by inequalities `|a . x| <= 1`.
    pub fn from_inequalities(dim: usize, rows: Vec<RatVec>) -> Result<PolytopeBall> {
        let verts = hrep::symmetric_vertices(&rows, dim)?;
        let ball = PolytopeBall::from_points_unpruned(dim, verts)?;
        ball.attach_hrep(rows);
        Ok(ball)
    }

    /// Record a complete (possibly redundant) inequality description. The
    /// caller guarantees that `{x : |a . x| <= 1 for all rows}` is this ball.
    pub fn attach_hrep(&self, rows: Vec<RatVec>) {
        let _ = self.hrep.set(hrep::dedup_rows(&rows));
    }

    pub fn with_hrep(self, rows: Vec<RatVec>) -> PolytopeBall {
        self.attach_hrep(rows);
        self
    }

    pub fn has_hrep(&self) -> bool {
        self.hrep.get().is_some()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[RatVec] {
        &self.generators
    }

    /// Generators together with their negatives.
    pub fn symmetric_points(&self) -> Vec<RatVec> {
        self.generators
            .iter()
            .flat_map(|g| [g.clone(), linalg::neg(g)])
            .collect()
    }

    /// Facet normals `a` with `|a . x| <= 1` describing the ball.
    pub fn hrep(&self) -> &[RatVec] {
        self.hrep.get_or_init(|| {
            hrep::symmetric_vertices(&self.generators, self.dim)
                .map(|v| hrep::dedup_rows(&v))
                .expect("generators span")
        })
    }

    fn check_dim(&self, x: &[Rat]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Exact gauge of `x`.
    pub fn gauge(&self, x: &[Rat]) -> Result<Rat> {
        self.check_dim(x)?;
        if let Some(rows) = self.hrep.get() {
            return Ok(self.gauge_from_rows(rows, x));
        }
        Ok(lp::hull_gauge(&self.generators, x)?.value)
    }

    /// `max |a . x|` over the facet rows, in integer arithmetic.
    fn gauge_from_rows(&self, rows: &[RatVec], x: &[Rat]) -> Rat {
        let int = self.int_rows.get_or_init(|| int_rows(rows));
        let den = x.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        let xi: Vec<BigInt> = x.iter().map(|v| v.numer() * (&den / v.denom())).collect();
        let mut best = (BigInt::zero(), BigInt::one());
        for r in int {
            let p = r.a.iter().zip(&xi).fold(BigInt::zero(), |acc, (a, b)| acc + a * b).abs();
            if &p * &best.1 > &best.0 * &r.scale {
                best = (p, r.scale.clone());
            }
        }
        Rat::from_big(best.0, best.1 * den)
    }

    /// Gauge together with a supporting functional and representation.
    pub fn gauge_certificate(&self, x: &[Rat]) -> Result<GaugeSolution> {
        self.check_dim(x)?;
        lp::hull_gauge(&self.generators, x)
    }

    pub fn contains(&self, x: &[Rat]) -> Result<bool> {
        Ok(self.gauge(x)? <= Rat::one())
    }

    /// Support function `max_{y in ball} u . y`.
    pub fn support(&self, u: &[Rat]) -> Result<Rat> {
        self.check_dim(u)?;
        Ok(self
            .generators
            .iter()
            .map(|g| linalg::dot(u, g).abs())
            .max()
            .unwrap_or_default())
    }

    /// `c * ball` for `c > 0`.
    pub fn scaled(&self, c: &Rat) -> PolytopeBall {
        assert!(c.is_positive());
        let gens = self.generators.iter().map(|g| linalg::scale(g, c)).collect();
        let out = PolytopeBall { dim: self.dim, generators: gens, hrep: Arc::default(), int_rows: Arc::default() };
        if let Some(rows) = self.hrep.get() {
            let inv = c.recip();
            out.attach_hrep(rows.iter().map(|a| linalg::scale(a, &inv)).collect());
        }
        out
    }

    /// `self` contains every generator of `other`.
    pub fn contains_ball(&self, other: &PolytopeBall) -> Result<bool> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let pts = other.generators.clone();
        let res: Result<Vec<bool>> = pts.par_iter().map(|g| self.contains(g)).collect();
        Ok(res?.into_iter().all(|b| b))
    }

    /// Equality of the represented norms.
    pub fn same_norm(&self, other: &PolytopeBall) -> Result<bool> {
        if self == other {
            return Ok(true);
        }
        Ok(self.contains_ball(other)? && other.contains_ball(self)?)
    }

    /// Generator form of `s * a + t * b`.
    pub fn minkowski_sum(a: &PolytopeBall, b: &PolytopeBall, s: &Rat, t: &Rat) -> Result<PolytopeBall> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
        }
        if s.is_negative() || t.is_negative() || (s.is_zero() && t.is_zero()) {
            return Err(Error::InvalidArgument("scales must be nonnegative, not both zero".into()));
        }
        if t.is_zero() {
            return Ok(a.scaled(s));
        }
        if s.is_zero() {
            return Ok(b.scaled(t));
        }
        let pa: Vec<RatVec> = a.generators.iter().map(|g| linalg::scale(g, s)).collect();
        let pb: Vec<RatVec> = b.symmetric_points().iter().map(|g| linalg::scale(g, t)).collect();
        let mut sums = Vec::with_capacity(pa.len() * pb.len());
        for x in &pa {
            for y in &pb {
                sums.push(linalg::add(x, y));
            }
        }
        PolytopeBall::new(a.dim, sums)
    }

    /// The slice `ball ∩ (R^k × {0})` as a ball in `R^k`.
    pub fn section(&self, k: usize) -> Result<PolytopeBall> {
        if k == 0 || k > self.dim {
            return Err(Error::OutOfRange(format!("section size {k} for dimension {}", self.dim)));
        }
        if k == self.dim {
            return Ok(self.clone());
        }
        let rows: Vec<RatVec> = self.hrep().iter().map(|a| a[..k].to_vec()).collect();
        PolytopeBall::from_inequalities(k, rows)
    }

    /// Image under the coordinate projection onto `coords`, re-embedded in
    /// `R^{coords.len()}`.
    pub fn project(&self, coords: &[usize]) -> Result<PolytopeBall> {
        for &c in coords {
            if c >= self.dim {
                return Err(Error::OutOfRange(format!("coordinate {c}")));
            }
        }
        let gens = self
            .generators
            .iter()
            .map(|g| coords.iter().map(|&c| g[c].clone()).collect())
            .collect();
        PolytopeBall::new(coords.len(), gens)
    }

    /// Embed generators into `R^big` at the listed coordinates.
    pub fn embed_points(&self, big: usize, coords: &[usize]) -> Vec<RatVec> {
        self.generators
            .iter()
            .map(|g| {
                let mut v = linalg::zeros(big);
                for (i, &c) in coords.iter().enumerate() {
                    v[c] = g[i].clone();
                }
                v
            })
            .collect()
    }

    /// Total encoding size of the generator list.
    pub fn encoding_size(&self) -> u64 {
        self.generators.iter().flatten().map(Rat::encoding_size).sum()
    }
}

/// Drop points lying in the symmetric hull of the remaining ones.
pub fn prune_redundant(list: &[RatVec]) -> Vec<RatVec> {
    if list.len() <= 1 {
        return list.to_vec();
    }
    let redundant: Vec<bool> = (0..list.len())
        .into_par_iter()
        .map(|i| {
            let others: Vec<RatVec> = list
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, g)| g.clone())
                .collect();
            match lp::hull_gauge(&others, &list[i]) {
                Ok(sol) => sol.value <= Rat::one(),
                Err(_) => false,
            }
        })
        .collect();
    list.iter()
        .zip(redundant)
        .filter(|(_, r)| !r)
        .map(|(g, _)| g.clone())
        .collect()
}

#[derive(Serialize, Deserialize)]
struct BallDoc {
    dim: usize,
    generators: Vec<Vec<String>>,
}

impl Serialize for PolytopeBall {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BallDoc { dim: self.dim, generators: self.generators.iter().map(|g| linalg::fmt_vec(g)).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolytopeBall {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<PolytopeBall, D::Error> {
        let doc = BallDoc::deserialize(d)?;
        let gens: Result<Vec<RatVec>> = doc.generators.iter().map(|g| linalg::parse_vec(g)).collect();
        let gens = gens.map_err(serde::de::Error::custom)?;
        PolytopeBall::new(doc.dim, gens).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    fn square() -> PolytopeBall {
        PolytopeBall::new(2, vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[1, -1])]).unwrap()
    }

    fn diamond() -> PolytopeBall {
        PolytopeBall::new(2, vec![v(&[1, 0]), v(&[0, 1])]).unwrap()
    }

    fn skew() -> PolytopeBall {
        PolytopeBall::new(2, vec![v(&[2, 1]), v(&[0, 1])]).unwrap()
    }

    #[test]
    fn canonical_square() {
        let sq = square();
        assert_eq!(sq.generators(), &[v(&[1, -1]), v(&[1, 1])]);
        assert_eq!(sq.gauge(&v(&[2, 1])).unwrap(), Rat::int(2));
        assert_eq!(sq.gauge(&v(&[0, 0])).unwrap(), Rat::zero());
    }

    #[test]
    fn containment_is_exact() {
        let sq = square();
        assert!(sq.contains(&v(&[1, 1])).unwrap());
        assert!(!sq.contains(&[Rat::one(), Rat::new(1_000_001, 1_000_000)]).unwrap());
        assert!(!skew().contains(&v(&[2, 0])).unwrap());
        assert_eq!(skew().gauge(&v(&[2, 0])).unwrap(), Rat::int(2));
    }

    #[test]
    fn rejects_degenerate() {
        assert_eq!(PolytopeBall::new(2, vec![v(&[1, 1])]).unwrap_err(), Error::NotANorm(2));
    }

    #[test]
    fn sums() {
        let sq = square();
        let two = PolytopeBall::minkowski_sum(&sq, &sq, &Rat::one(), &Rat::one()).unwrap();
        assert_eq!(two.gauge(&v(&[2, 1])).unwrap(), Rat::one());
        let mixed = PolytopeBall::minkowski_sum(&sq, &diamond(), &Rat::one(), &Rat::one()).unwrap();
        assert_eq!(mixed.gauge(&v(&[2, 0])).unwrap(), Rat::one());
        let same = PolytopeBall::minkowski_sum(&sq, &diamond(), &Rat::one(), &Rat::zero()).unwrap();
        assert!(same.same_norm(&sq).unwrap());
    }

    #[test]
    fn sections() {
        let s = square().section(1).unwrap();
        assert_eq!(s.generators(), &[v(&[1])]);
        let s = skew().section(1).unwrap();
        assert_eq!(s.generators(), &[v(&[1])]);
        assert_eq!(square().section(2).unwrap(), square());
    }

    #[test]
    fn hrep_of_square() {
        let rows = square().hrep().to_vec();
        assert_eq!(rows, vec![v(&[0, 1]), v(&[1, 0])]);
    }

    #[test]
    fn json_round_trip() {
        let s = serde_json::to_string(&skew()).unwrap();
        assert_eq!(s, r#"{"dim":2,"generators":[["0/1","1/1"],["2/1","1/1"]]}"#);
        let back: PolytopeBall = serde_json::from_str(&s).unwrap();
        assert_eq!(back, skew());
    }

    #[test]
    fn facet_route_matches_lp() {
        let r = |p: i64, q: i64| Rat::new(p, q);
        let ball = PolytopeBall::new(
            3,
            vec![
                vec![r(1, 2), r(0, 1), r(1, 3)],
                vec![r(0, 1), r(2, 7), r(-1, 5)],
                vec![r(3, 4), r(1, 1), r(0, 1)],
                vec![r(0, 1), r(0, 1), r(5, 6)],
                vec![r(1, 9), r(-2, 3), r(1, 2)],
            ],
        )
        .unwrap();
        let xs = [
            vec![r(3, 2), r(-7, 5), r(1, 11)],
            vec![r(0, 1), r(0, 1), r(0, 1)],
            vec![r(-13, 4), r(2, 9), r(5, 1)],
        ];
        let lp_values: Vec<Rat> = xs.iter().map(|x| ball.gauge(x).unwrap()).collect();
        assert!(!ball.has_hrep());
        ball.hrep();
        for (x, v) in xs.iter().zip(&lp_values) {
            assert_eq!(&ball.gauge(x).unwrap(), v);
        }
    }
}
