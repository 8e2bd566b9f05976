//! Truncated `ℓ₂(X)` frames: the sandwich search for the levels `|·|_d`,
//! the amalgamated norm `‖·‖` with unit ball `co(∪ B_d)`, and the operators
//! `T` and `U`.
//!
//! Coordinates of `F_D` are `f_1, ..., f_D` where `f_i` is the `i`-th slot
//! `(n, k)` of the diagonal enumeration with `k <= dim X`; slot `(n, k)`
//! is the `k`-th coordinate of the `n`-th copy of `X`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::catalog::{self, MAX_DIM};
use crate::error::{Error, Result};
use crate::hrep;
use crate::interval::CertInterval;
use crate::linalg::{self, RatVec};
use crate::polytope::PolytopeBall;
use crate::rat::Rat;
use crate::space::{self, BasisSpace, NormValue};

/// First `depth` slots `(n, k)` with `k <= m`, in diagonal order.
pub fn slots(m: usize, depth: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(depth);
    let mut i = 1u64;
    while out.len() < depth {
        let (n, k) = catalog::pi(i);
        if k as usize <= m {
            out.push((n, k));
        }
        i += 1;
    }
    out
}

/// Coordinates (0-based) of each block, ordered by block number and then
/// by position inside the block.
fn blocks_of(slots: &[(u64, u64)]) -> Vec<Vec<usize>> {
    let nblocks = slots.iter().map(|s| s.0).max().unwrap_or(0) as usize;
    let mut out = vec![Vec::new(); nblocks];
    for (i, &(n, _)) in slots.iter().enumerate() {
        out[n as usize - 1].push(i);
    }
    for b in &mut out {
        b.sort_by_key(|&i| slots[i].1);
    }
    out
}

/// Block vector of block `n` (1-based) padded to `R^m`.
fn block_vector(slots: &[(u64, u64)], m: usize, n: u64, f: &[Rat]) -> RatVec {
    let mut v = linalg::zeros(m);
    for (i, &(bn, k)) in slots.iter().enumerate() {
        if bn == n && i < f.len() {
            v[k as usize - 1] = f[i].clone();
        }
    }
    v
}

/// `‖f‖_{ℓ₂(X)}` for `f` in the first `f.len()` coordinates, with `X` any
/// basis space.
pub fn l2x_norm_space(x: &BasisSpace, depth: usize, f: &[Rat]) -> Result<NormValue> {
    if f.len() != depth {
        return Err(Error::DimensionMismatch { expected: depth, got: f.len() });
    }
    let sl = slots(x.dim, depth);
    let nblocks = sl.iter().map(|s| s.0).max().unwrap_or(0);
    let mut exact = Some(Rat::zero());
    let mut enclosure = CertInterval::point(Rat::zero());
    for n in 1..=nblocks {
        let v = block_vector(&sl, x.dim, n, f);
        if linalg::is_zero(&v) {
            continue;
        }
        let val = x.eval_norm(&v)?;
        match (&mut exact, val.square()) {
            (Some(acc), Some(sq)) => *acc += &sq,
            _ => exact = None,
        }
        enclosure = enclosure.add(&val.square_enclosure());
    }
    match exact {
        Some(sq) => Ok(NormValue::from_square(sq)),
        None => Ok(NormValue::Enclosure(enclosure.sqrt(&Rat::pow2(-64)))),
    }
}

/// Exact `ℓ₂(X)` geometry over a polytope `X`.
#[derive(Clone, Debug)]
struct Geometry {
    m: usize,
    x_ball: PolytopeBall,
    /// `sections[j - 1]` is the ball of `X` restricted to `e_1..e_j`.
    sections: Vec<PolytopeBall>,
}

impl Geometry {
    fn new(x_ball: &PolytopeBall) -> Result<Geometry> {
        let m = x_ball.dim();
        let x_ball = x_ball.clone();
        x_ball.hrep();
        let mut sections = Vec::with_capacity(m);
        for j in 1..=m {
            let s = x_ball.section(j)?;
            s.hrep();
            sections.push(s);
        }
        Ok(Geometry { m, x_ball, sections })
    }

    fn l2_sq(&self, slots: &[(u64, u64)], f: &[Rat]) -> Result<Rat> {
        let nblocks = slots.iter().map(|s| s.0).max().unwrap_or(0);
        let mut acc = Rat::zero();
        for n in 1..=nblocks {
            let v = block_vector(slots, self.m, n, f);
            if !linalg::is_zero(&v) {
                acc += &self.x_ball.gauge(&v)?.square();
            }
        }
        Ok(acc)
    }

    /// `‖φ‖²` in the dual of `ℓ₂(X)` restricted to `F_d`.
    fn dual_sq(&self, blocks: &[Vec<usize>], phi: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for b in blocks {
            let sec = &self.sections[b.len() - 1];
            let local: RatVec = b.iter().map(|&i| phi[i].clone()).collect();
            if linalg::is_zero(&local) {
                continue;
            }
            acc += &sec.support(&local).expect("dimension").square();
        }
        acc
    }
}

/// Exact two-sided comparison of a candidate `|·|_d` with `ℓ₂(X)` on `F_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichCertificate {
    /// `max ‖v‖²_{ℓ₂(X)}` over vertices `v` of the candidate ball.
    pub outer_max_sq: Rat,
    /// Required bound `(1 - 2^-(2d+1))^-2`.
    pub outer_bound_sq: Rat,
    /// `max` over facet functionals of the squared dual `ℓ₂(X)` norm.
    pub inner_max_sq: Rat,
    /// Required bound `(1 - 2^-(2d+2))^2`.
    pub inner_bound_sq: Rat,
}

impl SandwichCertificate {
    pub fn holds(&self) -> bool {
        self.outer_max_sq <= self.outer_bound_sq && self.inner_max_sq <= self.inner_bound_sq
    }
}

/// `1 - 2^-(2d+1)` and `1 - 2^-(2d+2)`.
pub fn sandwich_constants(d: usize) -> (Rat, Rat) {
    let lo = Rat::one() - Rat::pow2(-(2 * d as i64 + 1));
    let hi = Rat::one() - Rat::pow2(-(2 * d as i64 + 2));
    (lo, hi)
}

fn sandwich_certificate(geo: &Geometry, slots_d: &[(u64, u64)], ball: &PolytopeBall) -> Result<SandwichCertificate> {
    let d = slots_d.len();
    let (lo, hi) = sandwich_constants(d);
    let blocks = blocks_of(slots_d);
    let outer: Result<Vec<Rat>> = ball.generators().par_iter().map(|v| geo.l2_sq(slots_d, v)).collect();
    let outer_max_sq = outer?.into_iter().max().unwrap_or_default();
    let inner_max_sq = ball
        .hrep()
        .par_iter()
        .map(|phi| geo.dual_sq(&blocks, phi))
        .max()
        .unwrap_or_default();
    Ok(SandwichCertificate {
        outer_max_sq,
        outer_bound_sq: lo.square().recip(),
        inner_max_sq,
        inner_bound_sq: hi.square(),
    })
}

/// Where a level ball was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSource {
    /// Entry `l` of the monotone rational catalog in dimension `d`.
    Catalog { l: usize },
    /// Blockwise `ℓ₂`-splice of the sections of `X` along the inscribed
    /// quarter polygon with `polygon` edges, scaled by `1/(1 - 2^-(2d+1))`.
    Splice { polygon: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct Level {
    pub d: usize,
    /// 1-based position in the candidate sequence: catalog window first,
    /// then splice candidates in order of increasing polygon size.
    pub position: usize,
    pub source: LevelSource,
    pub ball: PolytopeBall,
    pub certificate: SandwichCertificate,
}

/// Candidate sequence for the sandwich search.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Catalog entries tried first in each dimension.
    pub catalog_window: fn(usize) -> usize,
    pub polygon_levels: Vec<u32>,
}

fn default_window(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 32,
        _ => 0,
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { catalog_window: default_window, polygon_levels: vec![2, 4, 8, 12, 16, 24, 32, 48, 64] }
    }
}

/// Body in local coordinates with vertices (sign-normalized) and facet
/// functionals; `coords[i]` is the `F_d` coordinate of local coordinate `i`.
struct Body {
    coords: Vec<usize>,
    verts: Vec<RatVec>,
    rows: Vec<RatVec>,
}

/// Vertices `((1-t²)/(1+t²), 2t/(1+t²))`, `t = j/N`, of the inscribed
/// quarter polygon, and the normals `(α, β)` of its edges.
fn quarter_polygon(n: u32) -> (Vec<(Rat, Rat)>, Vec<(Rat, Rat)>) {
    let pts: Vec<(Rat, Rat)> = (0..=n)
        .map(|j| {
            let t = Rat::new(j as i64, n as i64);
            let den = Rat::one() + t.square();
            ((Rat::one() - t.square()) / &den, (&t * Rat::int(2)) / &den)
        })
        .collect();
    let edges = pts
        .windows(2)
        .map(|w| {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            let det = x0 * y1 - x1 * y0;
            ((y1 - y0) / &det, (x0 - x1) / &det)
        })
        .collect();
    (pts, edges)
}

/// `{(a, b) : (|a|_L, |b|_R) in Q_N}`.
fn splice(l: &Body, r: &Body, n: u32) -> Body {
    let (pts, edges) = quarter_polygon(n);
    let dl = l.coords.len();
    let dr = r.coords.len();
    let l_all: Vec<RatVec> = l.verts.iter().flat_map(|v| [v.clone(), linalg::neg(v)]).collect();
    let mut verts = Vec::new();
    for (j, (px, py)) in pts.iter().enumerate() {
        if j == 0 {
            for v in &l.verts {
                let mut p = v.clone();
                p.extend(linalg::zeros(dr));
                verts.push(p);
            }
        } else if j == pts.len() - 1 {
            for w in &r.verts {
                let mut p = linalg::zeros(dl);
                p.extend(w.iter().cloned());
                verts.push(p);
            }
        } else {
            for v in &l_all {
                let sv = linalg::scale(v, px);
                for w in &r.verts {
                    let mut p = sv.clone();
                    p.extend(linalg::scale(w, py));
                    verts.push(p);
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (a, b) in &edges {
        for phi in &l.rows {
            let sp = linalg::scale(phi, a);
            for psi in &r.rows {
                for s in [Rat::one(), Rat::int(-1)] {
                    let mut row = sp.clone();
                    row.extend(linalg::scale(psi, &(b * &s)));
                    rows.push(row);
                }
            }
        }
    }
    let mut coords = l.coords.clone();
    coords.extend(r.coords.iter().cloned());
    Body { coords, verts: hrep::dedup_rows(&verts), rows: hrep::dedup_rows(&rows) }
}

fn reorder(v: &[Rat], coords: &[usize]) -> RatVec {
    let mut out = linalg::zeros(v.len());
    for (i, &c) in coords.iter().enumerate() {
        out[c] = v[i].clone();
    }
    out
}

/// Splice candidate for `F_d`: the blockwise `ℓ₂`-splice of the `X`
/// sections, nested left to right, scaled by `1/(1 - 2^-(2d+1))`.
fn splice_candidate(geo: &Geometry, slots_d: &[(u64, u64)], n: u32) -> Result<PolytopeBall> {
    let d = slots_d.len();
    let blocks = blocks_of(slots_d);
    let mut acc: Option<Body> = None;
    for b in &blocks {
        let sec = &geo.sections[b.len() - 1];
        let body = Body { coords: b.clone(), verts: sec.generators().to_vec(), rows: sec.hrep().to_vec() };
        acc = Some(match acc {
            None => body,
            Some(prev) => splice(&prev, &body, n),
        });
    }
    let body = acc.ok_or_else(|| Error::InvalidArgument("empty frame".into()))?;
    let (lo, _) = sandwich_constants(d);
    let inv = lo.recip();
    let verts: Vec<RatVec> = body.verts.iter().map(|v| linalg::scale(&reorder(v, &body.coords), &inv)).collect();
    let rows: Vec<RatVec> = body.rows.iter().map(|r| linalg::scale(&reorder(r, &body.coords), &lo)).collect();
    let ball = PolytopeBall::from_points_unpruned(d, verts)?;
    ball.attach_hrep(rows);
    Ok(ball)
}

/// Least position in the candidate sequence whose ball satisfies the
/// sandwich on `F_d`.
fn find_level(geo: &Geometry, all_slots: &[(u64, u64)], d: usize, opts: &SearchOptions) -> Result<Level> {
    let slots_d = &all_slots[..d];
    let window = (opts.catalog_window)(d);
    if window > 0 {
        let hit = catalog::scan(d, window, |l, ball| {
            let cert = sandwich_certificate(geo, slots_d, ball).ok()?;
            cert.holds().then(|| (l, ball.clone(), cert))
        })?;
        if let Some((l, ball, certificate)) = hit {
            return Ok(Level { d, position: l, source: LevelSource::Catalog { l }, ball, certificate });
        }
    }
    let single_block = blocks_of(slots_d).len() == 1;
    let mut last = window;
    for (i, &n) in opts.polygon_levels.iter().enumerate() {
        let ball = splice_candidate(geo, slots_d, n)?;
        let certificate = sandwich_certificate(geo, slots_d, &ball)?;
        last = window + i + 1;
        if certificate.holds() {
            return Ok(Level { d, position: last, source: LevelSource::Splice { polygon: n }, ball, certificate });
        }
        if single_block {
            break;
        }
    }
    Err(Error::BudgetExceeded { budget: (window + opts.polygon_levels.len()) as u64, last: last as u64 })
}

/// `X` must be a normalized monotone polytope space.
fn check_base(x: &BasisSpace) -> Result<PolytopeBall> {
    x.validate()?;
    let ball = x.ball().ok_or(Error::ExactNormRequired)?;
    for i in 0..x.dim {
        if ball.gauge(&linalg::unit(x.dim, i))? != Rat::one() {
            return Err(Error::Precondition(format!("basis vector e_{} does not have norm 1", i + 1)));
        }
    }
    if let Some((n, g)) = space::polytope_monotone_witness(&ball)? {
        return Err(Error::Precondition(format!(
            "basis is not monotone: P_{n} moves generator {:?} outside the ball",
            linalg::fmt_vec(&g)
        )));
    }
    Ok(ball)
}

/// Least level index for `F_d` over `X`, with its ball.
pub fn find_ld(x: &BasisSpace, d: usize, opts: &SearchOptions) -> Result<Level> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::OutOfRange(format!("level {d} outside 1..={MAX_DIM}")));
    }
    let geo = Geometry::new(&check_base(x)?)?;
    find_level(&geo, &slots(x.dim, d), d, opts)
}

/// `F_D` over `X` with its sandwich levels and amalgamated norm.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingFrame {
    pub x: BasisSpace,
    pub depth: usize,
    pub slots: Vec<(u64, u64)>,
    pub levels: Vec<Level>,
    #[serde(skip)]
    geo: Arc<Geometry>,
    #[serde(skip)]
    f_ball: Arc<OnceLock<PolytopeBall>>,
}

impl EmbeddingFrame {
    pub fn build(x: &BasisSpace, depth: usize, opts: &SearchOptions) -> Result<EmbeddingFrame> {
        if depth == 0 || depth > MAX_DIM {
            return Err(Error::OutOfRange(format!("depth {depth} outside 1..={MAX_DIM}")));
        }
        let geo = Geometry::new(&check_base(x)?)?;
        let sl = slots(x.dim, depth);
        let mut levels = Vec::with_capacity(depth);
        for d in 1..=depth {
            levels.push(find_level(&geo, &sl, d, opts)?);
        }
        Ok(EmbeddingFrame {
            x: x.clone(),
            depth,
            slots: sl,
            levels,
            geo: Arc::new(geo),
            f_ball: Arc::default(),
        })
    }

    pub fn m(&self) -> usize {
        self.x.dim
    }

    pub fn x_ball(&self) -> &PolytopeBall {
        &self.geo.x_ball
    }

    /// Number of blocks all of whose `dim X` coordinates lie in `F_D`.
    pub fn complete_blocks(&self) -> usize {
        blocks_of(&self.slots).iter().take_while(|b| b.len() == self.m()).count()
    }

    pub fn l_values(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.position).collect()
    }

    fn check(&self, f: &[Rat]) -> Result<()> {
        if f.len() != self.depth {
            return Err(Error::DimensionMismatch { expected: self.depth, got: f.len() });
        }
        Ok(())
    }

    /// Coordinate index (0-based) of slot `(n, k)` if it lies in `F_D`.
    pub fn coord_of(&self, n: u64, k: u64) -> Option<usize> {
        self.slots.iter().position(|&s| s == (n, k))
    }

    /// Exact `‖f‖²_{ℓ₂(X)}`.
    pub fn l2x_norm_sq(&self, f: &[Rat]) -> Result<Rat> {
        self.check(f)?;
        self.geo.l2_sq(&self.slots, f)
    }

    pub fn l2x_norm(&self, f: &[Rat]) -> Result<NormValue> {
        Ok(NormValue::from_square(self.l2x_norm_sq(f)?))
    }

    /// `|f|_d` for `f` supported in `F_d`.
    pub fn level_norm(&self, d: usize, f: &[Rat]) -> Result<Rat> {
        let level = self.levels.get(d.wrapping_sub(1)).ok_or_else(|| Error::OutOfRange(format!("level {d}")))?;
        if f.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: f.len() });
        }
        level.ball.gauge(f)
    }

    /// Unit ball `co(∪_{d <= D} B_d)` of `‖·‖` on `F_D`.
    pub fn f_ball(&self) -> &PolytopeBall {
        self.f_ball.get_or_init(|| {
            let mut pts = Vec::new();
            for level in &self.levels {
                let coords: Vec<usize> = (0..level.d).collect();
                pts.extend(level.ball.embed_points(self.depth, &coords));
            }
            PolytopeBall::from_points_unpruned(self.depth, pts).expect("level D spans F_D")
        })
    }

    pub fn f_norm(&self, f: &[Rat]) -> Result<Rat> {
        self.check(f)?;
        self.f_ball().gauge(f)
    }

    /// `‖f‖` with a supporting functional as certificate.
    pub fn f_norm_certificate(&self, f: &[Rat]) -> Result<crate::lp::GaugeSolution> {
        self.check(f)?;
        self.f_ball().gauge_certificate(f)
    }

    /// Exact certificate that `(7/8)‖f‖_{ℓ₂(X)} <= ‖f‖ <= ‖f‖_{ℓ₂(X)}` on
    /// all of `F_D`: every generator of the F-ball has `ℓ₂(X)` norm at most
    /// `8/7`, and the top level contains the `ℓ₂(X)` ball of `F_D`.
    pub fn f_sandwich_certificate(&self) -> Result<FSandwich> {
        let outer: Result<Vec<Rat>> =
            self.f_ball().generators().par_iter().map(|g| self.l2x_norm_sq(g)).collect();
        let max_generator_sq = outer?.into_iter().max().unwrap_or_default();
        let top = self.levels.last().expect("depth >= 1");
        Ok(FSandwich {
            max_generator_sq: max_generator_sq.clone(),
            bound_sq: Rat::new(64, 49),
            top_inner_max_sq: top.certificate.inner_max_sq.clone(),
            holds: max_generator_sq <= Rat::new(64, 49) && top.certificate.inner_max_sq <= Rat::one(),
        })
    }

    /// Projections of higher-level generators into `F_d` stay in `B_d`,
    /// hence `F-ball ∩ F_d = co(∪_{j <= d} B_j)`. Returns the first failure.
    pub fn rationality_witness(&self) -> Result<Option<(usize, usize, RatVec)>> {
        for d in 1..self.depth {
            let low = &self.levels[d - 1].ball;
            for level in &self.levels[d..] {
                for g in level.ball.generators() {
                    let p = g[..d].to_vec();
                    if !low.contains(&p)? {
                        return Ok(Some((d, level.d, g.clone())));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Monotonicity of every level; the F-ball inherits it because
    /// `P_n B_d ⊆ B_d` for every `d`.
    pub fn monotone_witness(&self) -> Result<Option<(usize, usize, RatVec)>> {
        for level in &self.levels {
            if let Some((n, g)) = space::polytope_monotone_witness(&level.ball)? {
                return Ok(Some((level.d, n, g)));
            }
        }
        Ok(None)
    }

    /// `‖f‖ - ‖P_n f‖ - 2^-(2n+4) ‖f - P_n f‖`.
    pub fn furthlemma_slack(&self, f: &[Rat], n: usize) -> Result<Rat> {
        self.check(f)?;
        if n == 0 || n >= self.depth {
            return Err(Error::OutOfRange(format!("n = {n} must satisfy 1 <= n < {}", self.depth)));
        }
        let p = space::partial_sum(n, f)?;
        let tail = linalg::sub(f, &p);
        let c = Rat::pow2(-(2 * n as i64 + 4));
        Ok(self.f_norm(f)? - self.f_norm(&p)? - c * self.f_norm(&tail)?)
    }

    pub fn verify_furthlemma(&self, f: &[Rat], n: usize) -> Result<(bool, Rat)> {
        let slack = self.furthlemma_slack(f, n)?;
        Ok((!slack.is_negative(), slack))
    }

    /// `T f = (√3/2) Σ_n 2^-(n-1) x_n`.
    pub fn operator_t(&self, f: &Sqrt3Vec) -> Result<Sqrt3Vec> {
        self.check(&f.coeffs)?;
        let m = self.m();
        let mut t = linalg::zeros(m);
        for (i, &(n, k)) in self.slots.iter().enumerate() {
            let c = &f.coeffs[i] * Rat::pow2(-(n as i64 - 1));
            t[k as usize - 1] += &c;
        }
        Ok(Sqrt3Vec { coeffs: t, sqrt3: f.sqrt3 }.times_half_sqrt3())
    }

    /// `U_N x = (√3/2)(x, x/2, ..., x/2^(N-1), 0, ...)` for `N` complete
    /// blocks.
    pub fn operator_u(&self, x: &Sqrt3Vec, blocks: usize) -> Result<Sqrt3Vec> {
        if x.coeffs.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: x.coeffs.len() });
        }
        if blocks == 0 || blocks > self.complete_blocks() {
            return Err(Error::OutOfRange(format!(
                "U keeps 1..={} complete blocks, asked for {blocks}",
                self.complete_blocks()
            )));
        }
        let mut f = linalg::zeros(self.depth);
        for (i, &(n, k)) in self.slots.iter().enumerate() {
            if n as usize <= blocks {
                f[i] = &x.coeffs[k as usize - 1] * Rat::pow2(-(n as i64 - 1));
            }
        }
        Ok(Sqrt3Vec { coeffs: f, sqrt3: x.sqrt3 }.times_half_sqrt3())
    }

    /// `‖x‖²_X` of a vector in the √3 calculus.
    pub fn x_norm_sq(&self, x: &Sqrt3Vec) -> Result<Rat> {
        Ok(self.x_ball().gauge(&x.coeffs)?.square() * x.factor_sq())
    }

    /// `‖f‖²` of a vector in the √3 calculus.
    pub fn f_norm_sq(&self, f: &Sqrt3Vec) -> Result<Rat> {
        Ok(self.f_norm(&f.coeffs)?.square() * f.factor_sq())
    }

    /// Checks of `TU`, `‖U_N x‖` and the projection `U_N T` at `x`.
    pub fn u_certificate(&self, x: &[Rat]) -> Result<UCertificate> {
        let blocks = self.complete_blocks();
        let xs = Sqrt3Vec::rational(x.to_vec());
        let u = self.operator_u(&xs, blocks)?;
        let tu = self.operator_t(&u)?;
        let shrink = Rat::one() - Rat::pow2(-2 * blocks as i64);
        let tu_truncated_exact = tu == xs.scale(&shrink);
        let x_sq = self.x_norm_sq(&xs)?;
        let u_sq = self.f_norm_sq(&u)?;
        let lower_sq = shrink.square() * &x_sq;
        let upper_sq = &shrink * &x_sq;
        let tail_sq = Rat::pow2(-2 * blocks as i64) * &x_sq;
        let holds = tu_truncated_exact && lower_sq <= u_sq && u_sq <= upper_sq;
        Ok(UCertificate { blocks, x_norm_sq: x_sq, u_norm_sq: u_sq, lower_sq, upper_sq, tail_sq, tu_truncated_exact, holds })
    }

    /// `‖f‖² - ‖Tf‖²_X`, nonnegative by the contraction property of `T`.
    pub fn t_contraction_slack_sq(&self, f: &[Rat]) -> Result<Rat> {
        let tf = self.operator_t(&Sqrt3Vec::rational(f.to_vec()))?;
        Ok(self.f_norm(f)?.square() - self.x_norm_sq(&tf)?)
    }

    /// `U_N T` is idempotent up to the truncation factor, maps into the
    /// image of `U_N`, and does not increase `‖·‖`.
    pub fn ut_projection_check(&self, f: &[Rat]) -> Result<bool> {
        let blocks = self.complete_blocks();
        let shrink = Rat::one() - Rat::pow2(-2 * blocks as i64);
        let p = self.operator_u(&self.operator_t(&Sqrt3Vec::rational(f.to_vec()))?, blocks)?;
        let pp = self.operator_u(&self.operator_t(&p)?, blocks)?;
        let idem = pp == p.scale(&shrink);
        let contr = self.f_norm_sq(&p)? <= self.f_norm(f)?.square();
        Ok(idem && contr)
    }
}

/// Exact real vector `coeffs * (√3)^sqrt3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sqrt3Vec {
    pub coeffs: RatVec,
    /// Whether the common factor `√3` is present.
    pub sqrt3: bool,
}

impl Sqrt3Vec {
    pub fn rational(coeffs: RatVec) -> Sqrt3Vec {
        Sqrt3Vec { coeffs, sqrt3: false }
    }

    /// Multiplication by `√3/2`.
    pub fn times_half_sqrt3(&self) -> Sqrt3Vec {
        if self.sqrt3 {
            Sqrt3Vec { coeffs: linalg::scale(&self.coeffs, &Rat::new(3, 2)), sqrt3: false }
        } else {
            Sqrt3Vec { coeffs: linalg::scale(&self.coeffs, &Rat::new(1, 2)), sqrt3: true }
        }
    }

    pub fn scale(&self, c: &Rat) -> Sqrt3Vec {
        Sqrt3Vec { coeffs: linalg::scale(&self.coeffs, c), sqrt3: self.sqrt3 }
    }

    fn factor_sq(&self) -> Rat {
        if self.sqrt3 {
            Rat::int(3)
        } else {
            Rat::one()
        }
    }

    /// Rational vector when the √3 factor is absent.
    pub fn as_rational(&self) -> Option<&RatVec> {
        (!self.sqrt3).then_some(&self.coeffs)
    }
}

/// Image of `x` under the untruncated `U`: `(√3/2) 2^-(n-1) x` in block
/// `n` for every `n`. Only finite portions are ever materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UImage {
    pub x: RatVec,
}

impl UImage {
    /// `T U x`: `(3/4) Σ_{n >= 1} 4^-(n-1) x = x`.
    pub fn t(&self) -> RatVec {
        // (√3/2)^2 * Σ 4^-(n-1) = (3/4) * (4/3)
        let series = Rat::new(4, 3);
        linalg::scale(&self.x, &(Rat::new(3, 4) * series))
    }

    /// Coordinate `e*_(n,k)` of `U x` divided by `√3/2`.
    pub fn coordinate_over_half_sqrt3(&self, n: u64, k: u64) -> Rat {
        &self.x[k as usize - 1] * Rat::pow2(-(n as i64 - 1))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UCertificate {
    pub blocks: usize,
    pub x_norm_sq: Rat,
    pub u_norm_sq: Rat,
    /// `((1 - 4^-N) ‖x‖)²`, from `T U_N x = (1 - 4^-N) x` and `‖T‖ <= 1`.
    pub lower_sq: Rat,
    /// `(1 - 4^-N) ‖x‖²`, the `ℓ₂(X)` norm of `U_N x`.
    pub upper_sq: Rat,
    /// Bound on `‖(U - U_N) x‖²`; `‖U x‖` lies within its square root of
    /// `‖U_N x‖`.
    pub tail_sq: Rat,
    pub tu_truncated_exact: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FSandwich {
    pub max_generator_sq: Rat,
    pub bound_sq: Rat,
    pub top_inner_max_sq: Rat,
    pub holds: bool,
}

#[derive(Deserialize)]
struct FrameDoc {
    x: BasisSpace,
    depth: usize,
    #[serde(default)]
    levels: Vec<LevelStub>,
}

#[derive(Deserialize)]
struct LevelStub {
    d: usize,
    position: usize,
}

impl<'de> Deserialize<'de> for EmbeddingFrame {
    /// Rebuilds the frame from `x` and `depth`; recorded level positions
    /// must agree with the rebuilt ones.
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<EmbeddingFrame, D::Error> {
        let doc = FrameDoc::deserialize(de)?;
        let frame = cached_frame(&doc.x, doc.depth).map_err(serde::de::Error::custom)?;
        for stub in &doc.levels {
            let level = frame.levels.get(stub.d.wrapping_sub(1));
            if level.map(|l| l.position) != Some(stub.position) {
                return Err(serde::de::Error::custom(format!(
                    "level {} position {} does not match the rebuilt frame",
                    stub.d, stub.position
                )));
            }
        }
        Ok((*frame).clone())
    }
}

fn frame_cache() -> &'static Mutex<HashMap<(String, usize), Arc<EmbeddingFrame>>> {
    static CACHE: OnceLock<Mutex<HashMap<(String, usize), Arc<EmbeddingFrame>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Frame with default search options, memoized per `(X, depth)`.
pub fn cached_frame(x: &BasisSpace, depth: usize) -> Result<Arc<EmbeddingFrame>> {
    let key = (serde_json::to_string(&x.norm)?, depth);
    if let Some(f) = frame_cache().lock().expect("frame cache").get(&key) {
        return Ok(f.clone());
    }
    let frame = Arc::new(EmbeddingFrame::build(x, depth, &SearchOptions::default())?);
    frame_cache().lock().expect("frame cache").insert(key, frame.clone());
    Ok(frame)
}

/// `R` with the absolute value.
pub fn real_line() -> BasisSpace {
    BasisSpace::polytope(PolytopeBall::new(1, vec![vec![Rat::one()]]).expect("segment"))
        .with_tags(&["normalized", "monotone"])
}

pub fn l1_plane() -> BasisSpace {
    let b = PolytopeBall::new(2, vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]]).expect("diamond");
    BasisSpace::polytope(b).with_tags(&["normalized", "monotone"])
}

pub fn linf_plane() -> BasisSpace {
    let b = PolytopeBall::new(2, vec![vec![Rat::one(), Rat::one()], vec![Rat::one(), Rat::int(-1)]]).expect("square");
    BasisSpace::polytope(b).with_tags(&["normalized", "monotone"])
}

/// Normalized monotone plane with ball
/// `co{±(1,a), ±(1,-b), ±(c,1), ±(-c',1)}`, `a, b, c, c'` in `[0, 1)`.
pub fn skewed_plane(a: Rat, b: Rat, c: Rat, c2: Rat) -> Result<BasisSpace> {
    for v in [&a, &b, &c, &c2] {
        if v.is_negative() || *v >= Rat::one() {
            return Err(Error::InvalidArgument("parameters must lie in [0, 1)".into()));
        }
    }
    let gens = vec![
        vec![Rat::one(), a],
        vec![Rat::one(), -b],
        vec![c, Rat::one()],
        vec![-c2, Rat::one()],
    ];
    let ball = PolytopeBall::new(2, gens)?;
    Ok(BasisSpace::polytope(ball).with_tags(&["normalized", "monotone"]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    #[test]
    fn slot_identification() {
        assert_eq!(slots(1, 3), vec![(1, 1), (2, 1), (3, 1)]);
        assert_eq!(slots(2, 6), vec![(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]);
        assert_eq!(blocks_of(&slots(3, 6)), vec![vec![0, 1, 3], vec![2, 4], vec![5]]);
    }

    #[test]
    fn l2x_values() {
        let x = real_line();
        assert_eq!(l2x_norm_space(&x, 3, &v(&[3, 0, 0])).unwrap(), NormValue::Exact(Rat::int(3)));
        assert_eq!(l2x_norm_space(&x, 3, &v(&[1, 1, 0])).unwrap(), NormValue::Sqrt(Rat::int(2)));
        assert_eq!(l2x_norm_space(&x, 3, &v(&[0, 0, 0])).unwrap(), NormValue::Exact(Rat::zero()));
        // ℓ∞ plane: block 1 = (1, 1), block 2 = (1, 0)
        let sq = linf_plane();
        assert_eq!(l2x_norm_space(&sq, 3, &v(&[1, 1, 1])).unwrap(), NormValue::Sqrt(Rat::int(2)));
    }

    #[test]
    fn quarter_polygon_edges() {
        let (pts, edges) = quarter_polygon(4);
        assert_eq!(pts[0], (Rat::one(), Rat::zero()));
        assert_eq!(pts[4], (Rat::zero(), Rat::one()));
        for (i, (a, b)) in edges.iter().enumerate() {
            for p in [&pts[i], &pts[i + 1]] {
                assert_eq!(a * &p.0 + b * &p.1, Rat::one());
            }
            for p in &pts {
                assert!(a * &p.0 + b * &p.1 <= Rat::one());
            }
        }
    }

    #[test]
    fn splice_points_are_extreme_and_rows_exact() {
        let seg = Body { coords: vec![0], verts: vec![v(&[1])], rows: vec![v(&[1])] };
        let seg2 = Body { coords: vec![1], verts: vec![v(&[1])], rows: vec![v(&[1])] };
        let poly = splice(&seg, &seg2, 3);
        let seg3 = Body { coords: vec![2], verts: vec![v(&[1])], rows: vec![v(&[1])] };
        let body = splice(&poly, &seg3, 3);
        let pruned = PolytopeBall::new(3, body.verts.clone()).unwrap();
        assert_eq!(pruned.generators().len(), body.verts.len());
        let from_rows = PolytopeBall::from_inequalities(3, body.rows.clone()).unwrap();
        assert!(from_rows.same_norm(&pruned).unwrap());
    }

    #[test]
    fn first_level_over_the_line() {
        let level = find_ld(&real_line(), 1, &SearchOptions::default()).unwrap();
        let g = &level.ball.generators()[0][0];
        // |t|_1 = |t| / g must lie in [7/8, 15/16] times |t|
        assert!(*g >= Rat::new(16, 15) && *g <= Rat::new(8, 7));
        assert!(matches!(level.source, LevelSource::Catalog { .. }));
        for l in 1..level.position {
            let b = catalog::rational_ball(1, l).unwrap();
            let c = &b.generators()[0][0];
            assert!(!(*c >= Rat::new(16, 15) && *c <= Rat::new(8, 7)));
        }
    }

    #[test]
    fn frame_over_the_line() {
        let frame = cached_frame(&real_line(), 3).unwrap();
        for level in &frame.levels {
            assert!(level.certificate.holds());
        }
        assert!(frame.f_sandwich_certificate().unwrap().holds);
        assert!(frame.rationality_witness().unwrap().is_none());
        assert!(frame.monotone_witness().unwrap().is_none());
        let f = vec![Rat::new(1, 2), Rat::new(-1, 3), Rat::one()];
        let n = frame.f_norm(&f).unwrap();
        let l2 = frame.l2x_norm_sq(&f).unwrap();
        assert!(n.square() <= l2 && Rat::new(49, 64) * &l2 <= n.square());
        assert!(frame.verify_furthlemma(&f, 1).unwrap().0);
        assert!(frame.verify_furthlemma(&f, 2).unwrap().0);
    }

    #[test]
    fn operators_over_the_line() {
        let frame = cached_frame(&real_line(), 3).unwrap();
        assert_eq!(frame.complete_blocks(), 3);
        let cert = frame.u_certificate(&v(&[1])).unwrap();
        assert!(cert.holds, "{cert:?}");
        assert!(!frame.t_contraction_slack_sq(&v(&[1, -1, 1])).unwrap().is_negative());
        assert!(frame.ut_projection_check(&v(&[1, -1, 1])).unwrap());
        assert_eq!(UImage { x: v(&[5]) }.t(), v(&[5]));
    }

    #[test]
    fn frame_json_rebuilds() {
        let frame = cached_frame(&real_line(), 2).unwrap();
        let s = serde_json::to_string(&*frame).unwrap();
        let back: EmbeddingFrame = serde_json::from_str(&s).unwrap();
        assert_eq!(back.l_values(), frame.l_values());
    }

    #[test]
    fn rejects_non_normalized_base() {
        let b = PolytopeBall::new(1, vec![v(&[2])]).unwrap();
        let err = find_ld(&BasisSpace::polytope(b), 1, &SearchOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
