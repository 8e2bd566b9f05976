//! Named verification suites. Every sample check is an [`Artifact`]: a
//! self-contained JSON description that [`evaluate`] decides, so a failing
//! sample can be dumped and replayed on its own.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embedding::{self, EmbeddingFrame, UImage};
use crate::error::{Error, Result};
use crate::interpolation::{self, InterpolationSpec};
use crate::interval::QuadSurd;
use crate::linalg::{self, RatVec};
use crate::polytope::PolytopeBall;
use crate::rat::Rat;
use crate::renorming::{self, Which};
use crate::space::BasisSpace;
use crate::treespace::{self, FiniteTree};

pub const SUITES: &[&str] = &[
    "embedding-sandwich",
    "operators",
    "furthlemma",
    "betabound",
    "alphabound",
    "rho-properties",
    "furthI",
    "furthII",
    "segments",
    "tree-monotone",
    "tree-equivalence",
    "b001",
    "interp-contraction",
    "interp-scale",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random samples per check group.
    pub samples: usize,
    /// Cap on frame depth and on the dimension of the base spaces.
    pub max_dim: usize,
    /// Target enclosure width for certified values.
    pub eps: Rat,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 42, samples: 50, max_dim: 4, eps: Rat::new(1, 1_000_000_000_000) }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=crate::catalog::MAX_DIM).contains(&self.max_dim) {
            return Err(Error::InvalidArgument(format!(
                "max-dim must lie in 2..={}",
                crate::catalog::MAX_DIM
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if !self.eps.is_positive() || self.eps > Rat::one() {
            return Err(Error::InvalidArgument("eps must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

pub fn canonical_suite(name: &str) -> Option<&'static str> {
    let alias = match name {
        "rho" => "rho-properties",
        "sandwich" | "embedding" => "embedding-sandwich",
        other => other,
    };
    SUITES.iter().copied().find(|s| *s == alias)
}

/// One replayable check.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Artifact {
    /// Level certificates, F-sandwich certificate, rationality and
    /// monotonicity of a frame.
    FrameStructure { x: BasisSpace, depth: usize },
    /// `(1 - 2^-(2d+1))‖f‖ <= |f|_d <= (1 - 2^-(2d+2))‖f‖` for `f ∈ F_d`.
    LevelSandwich { x: BasisSpace, depth: usize, d: usize, f: RatVec },
    /// `(7/8)‖f‖_{ℓ₂(X)} <= ‖f‖ <= ‖f‖_{ℓ₂(X)}`.
    FSandwich { x: BasisSpace, depth: usize, f: RatVec },
    /// `‖Tf‖ <= ‖f‖`, `TU y = y`, the `U_N` certificate at `y` and the
    /// projection `U_N T` at `f`.
    Operators { x: BasisSpace, depth: usize, f: RatVec, y: RatVec },
    Furthlemma { x: BasisSpace, depth: usize, f: RatVec, n: usize },
    FurthI { x: BasisSpace, depth: usize, f: RatVec, d: usize },
    FurthII { x: BasisSpace, depth: usize, f: RatVec, d: usize, eps: Rat },
    Betabound { x: BasisSpace, depth: usize, f: RatVec, d: usize },
    /// `β(f) = 0` exactly when the difference relations hold.
    Betanull { x: BasisSpace, depth: usize, f: RatVec },
    /// Every difference term of `β(U y)` vanishes, untruncated.
    BetanullImage { y: RatVec, blocks: u64 },
    Alphabound { x: BasisSpace, depth: usize, f: RatVec },
    /// The four properties of `ρ` at a signed triple `p`, positive base
    /// `(r, s, t)` and positive increments, plus flatness `ρ(1,1,t) = 1`.
    RhoProperties { p: [Rat; 3], base: [Rat; 3], incr: [Rat; 3], flat_t: Rat, eps: Rat },
    RhoAnchors { eps: Rat },
    /// Random segment in `F_D`: constancy only with the structural
    /// conclusion.
    Segment { x: BasisSpace, depth: usize, u: RatVec, v: RatVec, which: Which, eps: Rat },
    /// Flat segment `[U a, U b]`: constant, with the conclusion.
    ImageSegment { x: BasisSpace, depth: usize, a: RatVec, b: RatVec, which: Which },
    BSegment { tree: Arc<FiniteTree>, u: RatVec, v: RatVec, expect_flat: bool },
    /// A chain-supported vector evaluates to its branch norm in `E` and `B`.
    TreeChain { tree: Arc<FiniteTree>, leaf: usize, x: RatVec },
    /// `E` and `B` do not increase under the subtree projection.
    TreeProjection { tree: Arc<FiniteTree>, subtree: Vec<usize>, x: RatVec },
    /// Level gain on every branch of a tree.
    TreeConstants { tree: Arc<FiniteTree>, samples: Vec<RatVec> },
    B001Frame { x: BasisSpace, depth: usize, which: Which, z: RatVec, eps: Rat },
    /// Level gain on a space given as a norm expression; `expect_witness`
    /// marks negative controls.
    B001Space { space: BasisSpace, constants: Vec<Rat>, samples: Vec<RatVec>, expect_witness: bool },
    InterpContraction { tree: Arc<FiniteTree>, subtree: Vec<usize>, x: RatVec, levels: usize, eps: Rat },
    /// `|||x||| / |x|` on the line against the series constant.
    InterpScaleLine { x: Rat, eps: Rat },
    /// Branch subspace of `A`: `P W = P B_E` and the same ratio at two
    /// vectors.
    InterpBranchScale { tree: Arc<FiniteTree>, leaf: usize, x: RatVec, y: RatVec, levels: usize, eps: Rat },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Exact slack (or lower end of a slack enclosure) when the check has
    /// one.
    pub slack: Option<Rat>,
    pub detail: String,
}

impl Outcome {
    fn from_bool(ok: bool, slack: Option<Rat>, detail: impl Into<String>) -> Outcome {
        Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, slack, detail: detail.into() }
    }

    fn from_error(e: Error) -> Outcome {
        let verdict = if matches!(e, Error::Undecided(_)) { Verdict::Undecided } else { Verdict::Fail };
        Outcome { verdict, slack: None, detail: format!("error: {e}") }
    }
}

/// Frame from the memo, with the F-ball inequality description warmed.
pub fn frame(x: &BasisSpace, depth: usize) -> Result<Arc<EmbeddingFrame>> {
    let f = embedding::cached_frame(x, depth)?;
    warm_hrep(f.f_ball());
    Ok(f)
}

/// Compute (or load from `NORMFORGE_CACHE`) the inequality description of
/// a ball. Loaded rows must be valid and tight on some generator.
pub fn warm_hrep(ball: &PolytopeBall) {
    if ball.has_hrep() {
        return;
    }
    let Some(dir) = std::env::var_os("NORMFORGE_CACHE").map(PathBuf::from) else {
        ball.hrep();
        return;
    };
    let key = digest(&ball.generators());
    let path = dir.join(format!("hrep-{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(doc) = serde_json::from_str::<Vec<Vec<String>>>(&text) {
            let rows: Option<Vec<RatVec>> = doc.iter().map(|r| linalg::parse_vec(r).ok()).collect();
            if let Some(rows) = rows {
                if rows_describe(ball, &rows) {
                    ball.attach_hrep(rows);
                    return;
                }
            }
        }
    }
    let rows = ball.hrep();
    let doc: Vec<Vec<String>> = rows.iter().map(|r| linalg::fmt_vec(r)).collect();
    if std::fs::create_dir_all(&dir).is_ok() {
        let _ = std::fs::write(&path, serde_json::to_string(&doc).unwrap_or_default());
    }
}

fn rows_describe(ball: &PolytopeBall, rows: &[RatVec]) -> bool {
    !rows.is_empty()
        && rows.iter().all(|r| {
            r.len() == ball.dim() && {
                let m = ball.generators().iter().map(|g| linalg::dot(r, g).abs()).max().unwrap_or_default();
                m == Rat::one()
            }
        })
}

fn interp_cache() -> &'static Mutex<HashMap<String, Arc<InterpolationSpec>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<InterpolationSpec>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `A` of a tree, memoized per tree.
pub fn tree_spec(tree: &FiniteTree) -> Result<Arc<InterpolationSpec>> {
    let key = serde_json::to_string(tree)?;
    if let Some(s) = interp_cache().lock().expect("interp cache").get(&key) {
        return Ok(s.clone());
    }
    let spec = Arc::new(interpolation::build_a(tree)?);
    interp_cache().lock().expect("interp cache").insert(key, spec.clone());
    Ok(spec)
}

fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    let hash = Sha256::digest(&bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

fn pad(f: &[Rat], n: usize) -> RatVec {
    let mut v = f.to_vec();
    v.resize(n, Rat::zero());
    v
}

/// Decide one artifact.
pub fn evaluate(a: &Artifact) -> Outcome {
    eval_inner(a).unwrap_or_else(Outcome::from_error)
}

fn eval_inner(a: &Artifact) -> Result<Outcome> {
    match a {
        Artifact::FrameStructure { x, depth } => {
            let fr = frame(x, *depth)?;
            let levels_ok = fr.levels.iter().all(|l| l.certificate.holds());
            let fs = fr.f_sandwich_certificate()?;
            let rational = fr.rationality_witness()?.is_none();
            let monotone = fr.monotone_witness()?.is_none();
            let detail = format!(
                "l = {:?}; levels {levels_ok}; F-sandwich {}; rationality {rational}; monotone {monotone}",
                fr.l_values(),
                fs.holds
            );
            Ok(Outcome::from_bool(levels_ok && fs.holds && rational && monotone, None, detail))
        }
        Artifact::LevelSandwich { x, depth, d, f } => {
            let fr = frame(x, *depth)?;
            let l = fr.l2x_norm_sq(&pad(f, *depth))?;
            let g = fr.level_norm(*d, f)?.square();
            let (lo, hi) = embedding::sandwich_constants(*d);
            let s1 = &g - lo.square() * &l;
            let s2 = hi.square() * &l - &g;
            let ok = !s1.is_negative() && !s2.is_negative();
            Ok(Outcome::from_bool(ok, Some(s1.min(s2)), "squared level sandwich"))
        }
        Artifact::FSandwich { x, depth, f } => {
            let fr = frame(x, *depth)?;
            let l = fr.l2x_norm_sq(f)?;
            let n = fr.f_norm(f)?.square();
            let s1 = &n - Rat::new(49, 64) * &l;
            let s2 = &l - &n;
            let ok = !s1.is_negative() && !s2.is_negative();
            Ok(Outcome::from_bool(ok, Some(s1.min(s2)), "squared F sandwich"))
        }
        Artifact::Operators { x, depth, f, y } => {
            let fr = frame(x, *depth)?;
            let t = fr.t_contraction_slack_sq(f)?;
            let tu = UImage { x: y.clone() }.t() == *y;
            let cert = fr.u_certificate(y)?;
            let proj = fr.ut_projection_check(f)?;
            let ok = !t.is_negative() && tu && cert.holds && proj;
            let detail = format!("TU = id {tu}; U_N certificate {}; U_N T projection {proj}", cert.holds);
            Ok(Outcome::from_bool(ok, Some(t), detail))
        }
        Artifact::Furthlemma { x, depth, f, n } => {
            let fr = frame(x, *depth)?;
            let (ok, slack) = fr.verify_furthlemma(f, *n)?;
            Ok(Outcome::from_bool(ok, Some(slack), "exact"))
        }
        Artifact::FurthI { x, depth, f, d } => {
            let fr = frame(x, *depth)?;
            let c = renorming::furthlemma_i(&fr, f, *d)?;
            Ok(Outcome::from_bool(c.holds, Some(c.slack.lo), "decided on squares"))
        }
        Artifact::FurthII { x, depth, f, d, eps } => {
            let fr = frame(x, *depth)?;
            let c = renorming::furthlemma_ii(&fr, f, *d, eps)?;
            let narrow = c.slack.width() <= *eps;
            let detail = format!("slack in [{}, {}]", c.slack.lo, c.slack.hi);
            Ok(Outcome::from_bool(c.holds && narrow, Some(c.slack.lo), detail))
        }
        Artifact::Betabound { x, depth, f, d } => {
            let fr = frame(x, *depth)?;
            let c = renorming::betabound(&fr, f, *d)?;
            Ok(Outcome::from_bool(c.holds, Some(c.slack.lo), "exact on squares"))
        }
        Artifact::Betanull { x, depth, f } => {
            let fr = frame(x, *depth)?;
            let zero = renorming::beta_sq(&fr, f)?.is_zero();
            let rel = renorming::beta_relations_hold(&fr, f)?;
            Ok(Outcome::from_bool(zero == rel, None, format!("beta zero {zero}; relations {rel}")))
        }
        Artifact::BetanullImage { y, blocks } => {
            let terms = renorming::u_image_beta_terms(&UImage { x: y.clone() }, *blocks);
            Ok(Outcome::from_bool(terms.iter().all(Rat::is_zero), None, "symbolic image of U"))
        }
        Artifact::Alphabound { x, depth, f } => {
            let fr = frame(x, *depth)?;
            let c = renorming::alphabound(&fr, f)?;
            Ok(Outcome::from_bool(c.holds, Some(c.slack.lo), "strict, exact on squares"))
        }
        Artifact::RhoProperties { p, base, incr, flat_t, eps } => Ok(rho_properties(p, base, incr, flat_t, eps)),
        Artifact::RhoAnchors { eps } => {
            let one = Rat::one();
            let z = Rat::zero();
            let a = renorming::rho(&one, &one, &one, eps)?;
            let b = renorming::rho(&one, &one, &z, eps)?;
            let c = renorming::rho(&Rat::int(2), &z, &z, eps)?;
            let target = QuadSurd::new(Rat::new(1, 2), Rat::new(1, 2));
            let exact_c = renorming::rho_exact(&Rat::int(2), &z, &z).cmp_exact(&target) == Ordering::Equal;
            let oracle = target.enclose(eps);
            let ok = a.contains(&one)
                && b.contains(&one)
                && c.intersects(&oracle)
                && exact_c
                && [&a, &b, &c].iter().all(|i| i.width() <= *eps);
            Ok(Outcome::from_bool(ok, None, format!("rho(2,0,0) in [{}, {}]", c.lo, c.hi)))
        }
        Artifact::Segment { x, depth, u, v, which, eps } => {
            let fr = frame(x, *depth)?;
            let s = renorming::segment_detector(&fr, u, v, *which, eps)?;
            let ok = !s.constant || s.conclusion_holds == Some(true);
            Ok(Outcome::from_bool(ok, None, s.detail))
        }
        Artifact::ImageSegment { x, depth, a, b, which } => {
            let fr = frame(x, *depth)?;
            let s = renorming::u_image_segment(&fr, a, b, *which)?;
            Ok(Outcome::from_bool(s.constant && s.conclusion_holds == Some(true), None, s.detail))
        }
        Artifact::BSegment { tree, u, v, expect_flat } => {
            let s = treespace::b_segment_check(tree, u, v)?;
            let concl = s.on_chain == Some(true) && s.projected_flat == Some(true);
            let ok = if *expect_flat { s.constant && concl } else { !s.constant || concl };
            Ok(Outcome::from_bool(ok, None, format!("constant {}; leaf {:?}", s.constant, s.leaf)))
        }
        Artifact::TreeChain { tree, leaf, x } => {
            let chain = tree.chain(*leaf);
            if x.len() != chain.len() {
                return Err(Error::DimensionMismatch { expected: chain.len(), got: x.len() });
            }
            let mut v = linalg::zeros(tree.node_count());
            for (j, &c) in chain.iter().enumerate() {
                v[c] = x[j].clone();
            }
            let branch = tree.branch(*leaf).eval_norm(x)?.square().ok_or(Error::ExactNormRequired)?;
            let e = tree.e_norm(&v)?.square().ok_or(Error::ExactNormRequired)?;
            let b = tree.b_norm(&v)?.value.square().ok_or(Error::ExactNormRequired)?;
            Ok(Outcome::from_bool(e == branch && b == branch, None, "exact squares"))
        }
        Artifact::TreeProjection { tree, subtree, x } => {
            let px = tree.subtree_projection(subtree, x)?;
            let sq = |v: crate::space::NormValue| v.square().ok_or(Error::ExactNormRequired);
            let de = sq(tree.e_norm(x)?)? - sq(tree.e_norm(&px)?)?;
            let db = sq(tree.b_norm(x)?.value)? - sq(tree.b_norm(&px)?.value)?;
            let ok = !de.is_negative() && !db.is_negative();
            Ok(Outcome::from_bool(ok, Some(de.min(db)), "exact squares"))
        }
        Artifact::TreeConstants { tree, samples } => {
            tree.verify_constants(samples)?;
            Ok(Outcome::from_bool(true, None, "level gain on every branch"))
        }
        Artifact::B001Frame { x, depth, which, z, eps } => {
            let fr = frame(x, *depth)?;
            let w = match which {
                Which::I => renorming::b001_i(&fr, z)?,
                Which::II => renorming::b001_ii(&fr, z, eps)?,
            };
            Ok(Outcome::from_bool(w.is_none(), None, format!("first failing level {w:?}")))
        }
        Artifact::B001Space { space, constants, samples, expect_witness } => {
            let r = treespace::verify_b001(space, constants, samples)?;
            let found = r.witness.is_some();
            let detail = match &r.witness {
                Some(w) => format!("witness at n = {} on {:?}", w.n, linalg::fmt_vec(&w.vector)),
                None => format!("{} probes, no violation", r.checked),
            };
            Ok(Outcome::from_bool(found == *expect_witness, r.min_slack, detail))
        }
        Artifact::InterpContraction { tree, subtree, x, levels, eps } => {
            let spec = tree_spec(tree)?;
            let px = tree.subtree_projection(subtree, x)?;
            let (xo, wo) = spec.projection_preconditions(subtree)?;
            let mut termwise = true;
            for n in 1..=*levels {
                if spec.level_norm(n, &px)? > spec.level_norm(n, x)? {
                    termwise = false;
                }
            }
            let a = spec.interpolation_norm(&px, eps)?;
            let b = spec.interpolation_norm(x, eps)?;
            let no_violation = a.lo <= b.hi;
            let detail = format!("P B_E in B_E {xo}; P W in W {wo}; first {levels} levels {termwise}");
            Ok(Outcome::from_bool(xo && wo && termwise && no_violation, Some(&b.hi - &a.lo), detail))
        }
        Artifact::InterpScaleLine { x, eps } => {
            if x.is_zero() {
                return Err(Error::Precondition("x must be nonzero".into()));
            }
            let spec = interpolation::line_spec();
            let ax = x.abs();
            let v = spec.interpolation_norm(std::slice::from_ref(x), &(eps * &ax))?;
            let ratio = v.scale(&ax.recip());
            let c = interpolation::scale_constant(eps);
            let mut law = true;
            for n in 1..=8usize {
                let s = Rat::pow2(n as i64) + Rat::pow2(-(n as i64));
                if spec.level_norm(n, std::slice::from_ref(x))? * s != ax {
                    law = false;
                }
            }
            let ok = law && ratio.intersects(&c) && ratio.width() <= *eps;
            Ok(Outcome::from_bool(ok, None, format!("ratio in [{}, {}]", ratio.lo, ratio.hi)))
        }
        Artifact::InterpBranchScale { tree, leaf, x, y, levels, eps } => {
            let spec = tree_spec(tree)?;
            let chain = tree.chain(*leaf);
            let agree = spec.projected_balls_agree(&chain)?;
            let c = interpolation::scale_constant(eps);
            let mut ratios = Vec::new();
            let mut law = true;
            for v in [x, y] {
                if v.iter().enumerate().any(|(i, t)| !t.is_zero() && !chain.contains(&i)) || linalg::is_zero(v) {
                    return Err(Error::Precondition("vectors must be nonzero and supported on the branch".into()));
                }
                let nv = spec.x_ball().gauge(v)?;
                for n in 1..=*levels {
                    let s = Rat::pow2(n as i64) + Rat::pow2(-(n as i64));
                    if spec.level_norm(n, v)? * s != nv {
                        law = false;
                    }
                }
                ratios.push(spec.interpolation_norm(v, &(eps * &nv))?.scale(&nv.recip()));
            }
            let ok = agree
                && law
                && ratios[0].intersects(&ratios[1])
                && ratios.iter().all(|r| r.intersects(&c) && r.width() <= *eps);
            let detail = format!("P W = P B_E {agree}; per-level law {law}");
            Ok(Outcome::from_bool(ok, None, detail))
        }
    }
}

fn rho_properties(p: &[Rat; 3], base: &[Rat; 3], incr: &[Rat; 3], flat_t: &Rat, eps: &Rat) -> Outcome {
    let rho = |r: &Rat, s: &Rat, t: &Rat| renorming::rho_exact(r, s, t);
    let [r, s, t] = base;
    let [dr, ds, dt] = incr;
    if [r, s, t, dr, ds, dt].iter().any(|v| !v.is_positive()) {
        return Outcome::from_error(Error::Precondition("base and increments must be positive".into()));
    }
    let mut failed = Vec::new();
    // bounds
    let v = rho(&p[0], &p[1], &p[2]);
    let lower = (p[0].abs() + p[1].abs()) * Rat::new(1, 2);
    let upper = p.iter().map(Rat::abs).max().unwrap_or_default();
    if v.cmp_rat(&lower) == Ordering::Less || v.cmp_rat(&upper) == Ordering::Greater {
        failed.push("bounds");
    }
    if rho(&Rat::one(), &Rat::one(), flat_t).cmp_rat(&Rat::one()) != Ordering::Equal {
        failed.push("flat segment");
    }
    // monotone on the positive octant
    let lo = rho(r, s, t);
    if rho(&(r + dr), &(s + ds), &(t + dt)).cmp_exact(&lo) == Ordering::Less {
        failed.push("monotone");
    }
    // strict in t when 0 < r < s
    let s2 = r + ds;
    if rho(r, &s2, &(t + dt)).cmp_exact(&rho(r, &s2, t)) != Ordering::Greater {
        failed.push("strict in t");
    }
    // gain in r
    let gain = lo.add_rat(&(dr * Rat::new(1, 4)));
    if rho(&(r + dr), s, t).cmp_exact(&gain) == Ordering::Less {
        failed.push("gain in r");
    }
    let enc = [
        renorming::rho(&p[0], &p[1], &p[2], eps),
        renorming::rho(r, s, t, eps),
        renorming::rho(&(r + dr), s, t, eps),
    ];
    for e in enc {
        match e {
            Ok(iv) if iv.width() <= *eps => {}
            _ => failed.push("enclosure width"),
        }
    }
    if failed.is_empty() {
        Outcome::from_bool(true, None, "all four properties")
    } else {
        Outcome::from_bool(false, None, format!("failed: {}", failed.join(", ")))
    }
}

/// Aggregated record of one group of artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// SHA-256 of the JSON of every artifact in the group.
    pub inputs_digest: String,
    pub verdict: Verdict,
    pub evaluated: usize,
    pub passed: usize,
    pub failed: usize,
    pub undecided: usize,
    pub min_slack: Option<Rat>,
    /// First non-passing artifact, replayable on its own.
    pub witness: Option<Artifact>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub undecided: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0 && self.summary.undecided == 0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SuiteConfig,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
    /// SHA-256 of the JSON of `suites`.
    pub digest: String,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0 && self.summary.undecided == 0
    }
}

struct Group {
    name: String,
    items: Vec<Artifact>,
}

fn record(group: Group) -> CheckRecord {
    let outcomes: Vec<Outcome> = group.items.par_iter().map(evaluate).collect();
    let count = |v: Verdict| outcomes.iter().filter(|o| o.verdict == v).count();
    let (passed, failed, undecided) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Undecided));
    let verdict = if failed > 0 {
        Verdict::Fail
    } else if undecided > 0 {
        Verdict::Undecided
    } else {
        Verdict::Pass
    };
    let min_slack = outcomes.iter().filter_map(|o| o.slack.clone()).min();
    let bad = outcomes.iter().position(|o| o.verdict != Verdict::Pass);
    let detail = match bad {
        Some(i) => outcomes[i].detail.clone(),
        None => outcomes.first().map(|o| o.detail.clone()).unwrap_or_default(),
    };
    CheckRecord {
        inputs_digest: digest(&group.items),
        name: group.name,
        verdict,
        evaluated: outcomes.len(),
        passed,
        failed,
        undecided,
        min_slack,
        witness: bad.map(|i| group.items[i].clone()),
        detail,
    }
}

/// Run one suite, or every suite for `"all"`.
pub fn run(name: &str, config: &SuiteConfig) -> Result<RunReport> {
    config.validate()?;
    let names: Vec<&str> = if name == "all" {
        SUITES.to_vec()
    } else {
        vec![canonical_suite(name).ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name:?}")))?]
    };
    let mut suites = Vec::new();
    for n in names {
        suites.push(run_suite(n, config)?);
    }
    let mut summary = Summary::default();
    for s in &suites {
        summary.pass += s.summary.pass;
        summary.fail += s.summary.fail;
        summary.undecided += s.summary.undecided;
    }
    let digest = digest(&suites);
    Ok(RunReport { config: config.clone(), suites, summary, digest })
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let name = canonical_suite(name).ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name:?}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ fnv(name));
    let groups = build_groups(name, config, &mut rng)?;
    let checks: Vec<CheckRecord> = groups.into_iter().map(record).collect();
    let mut summary = Summary::default();
    for c in &checks {
        match c.verdict {
            Verdict::Pass => summary.pass += 1,
            Verdict::Fail => summary.fail += 1,
            Verdict::Undecided => summary.undecided += 1,
        }
    }
    Ok(SuiteReport { suite: name.to_string(), checks, summary })
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Random rational `p/q` with `|p| <= 9`, `1 <= q <= 6`.
pub fn random_rat<R: Rng>(rng: &mut R) -> Rat {
    Rat::new(rng.gen_range(-9..=9), rng.gen_range(1..=6))
}

fn random_pos<R: Rng>(rng: &mut R) -> Rat {
    Rat::new(rng.gen_range(1..=9), rng.gen_range(1..=6))
}

/// Random nonzero vector.
pub fn random_vec<R: Rng>(rng: &mut R, d: usize) -> RatVec {
    loop {
        let v: RatVec = (0..d).map(|_| random_rat(rng)).collect();
        if !linalg::is_zero(&v) {
            return v;
        }
    }
}

/// Base spaces of the frame suites with their depths.
/// The random plane depends on the seed only, so all suites share it.
pub fn frame_spaces(config: &SuiteConfig) -> Result<Vec<(String, BasisSpace, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = vec![("line".to_string(), embedding::real_line(), config.max_dim.min(3))];
    let depth = config.max_dim.min(4);
    out.push(("l1".to_string(), embedding::l1_plane(), depth));
    out.push(("linf".to_string(), embedding::linf_plane(), depth));
    let mut p = || Rat::new(rng.gen_range(0..=4), rng.gen_range(5..=8));
    let (a, b, c, c2) = (p(), p(), p(), p());
    let name = format!("skewed({a},{b},{c},{c2})");
    out.push((name, embedding::skewed_plane(a, b, c, c2)?, depth));
    Ok(out)
}

fn random_subtree<R: Rng>(rng: &mut R, tree: &FiniteTree) -> Vec<usize> {
    let paths = tree.node_paths();
    let mut keep = vec![false; paths.len()];
    for i in 0..paths.len() {
        if rng.gen_bool(0.5) {
            let mut p = paths[i].clone();
            loop {
                if let Some(j) = tree.node_index(&p) {
                    keep[j] = true;
                }
                match p.rfind('/') {
                    Some(k) => p.truncate(k),
                    None => break,
                }
            }
        }
    }
    (0..paths.len()).filter(|&i| keep[i]).collect()
}

fn random_trees<R: Rng>(rng: &mut R, count: usize, max_nodes: usize, max_depth: usize) -> Result<Vec<Arc<FiniteTree>>> {
    (0..count).map(|_| treespace::random_coherent_tree(rng, max_nodes, max_depth).map(Arc::new)).collect()
}

/// Unit `ℓ¹` fork with `c = 1` and the flat segment `[e_a, e_(a,b)]`.
pub fn flat_fork() -> Result<(FiniteTree, RatVec, RatVec)> {
    let l1 = embedding::l1_plane();
    let mut norms = std::collections::BTreeMap::new();
    norms.insert("a/b".to_string(), l1.clone());
    norms.insert("a/c".to_string(), l1);
    let s = |x: &str| x.to_string();
    let tree = FiniteTree::new(
        vec![s("a"), s("b"), s("c")],
        vec![vec![s("a")], vec![s("a"), s("b")], vec![s("a"), s("c")]],
        norms,
        vec![Rat::one(), Rat::one()],
    )?;
    let u = vec![Rat::one(), Rat::zero(), Rat::zero()];
    let v = vec![Rat::zero(), Rat::one(), Rat::zero()];
    Ok((tree, u, v))
}

/// Two points on a common facet of the unit ball of `X`.
fn facet_pair<R: Rng>(rng: &mut R, ball: &PolytopeBall) -> Option<(RatVec, RatVec)> {
    let rows = ball.hrep();
    let row = &rows[rng.gen_range(0..rows.len())];
    let on: Vec<RatVec> = ball
        .symmetric_points()
        .into_iter()
        .filter(|g| linalg::dot(row, g) == Rat::one())
        .collect();
    if on.len() < 2 {
        return None;
    }
    let mut point = || {
        let w: Vec<Rat> = on.iter().map(|_| Rat::int(rng.gen_range(0..=4))).collect();
        let total = w.iter().fold(Rat::zero(), |a, b| a + b);
        if total.is_zero() {
            return on[0].clone();
        }
        on.iter().zip(&w).fold(linalg::zeros(ball.dim()), |acc, (g, c)| linalg::add(&acc, &linalg::scale(g, &(c / &total))))
    };
    let a = point();
    let mut b = point();
    if a == b {
        b = if a == on[0] { on[1].clone() } else { on[0].clone() };
    }
    let scale = random_pos(rng);
    Some((linalg::scale(&a, &scale), linalg::scale(&b, &scale)))
}

fn build_groups(name: &str, cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Group>> {
    let k = cfg.samples;
    let mut groups = Vec::new();
    let mut push = |name: String, items: Vec<Artifact>| groups.push(Group { name, items });
    match name {
        "embedding-sandwich" => {
            for (sn, x, depth) in frame_spaces(cfg)? {
                let fr = frame(&x, depth)?;
                push(format!("{sn}: frame structure"), vec![Artifact::FrameStructure { x: x.clone(), depth }]);
                for level in &fr.levels {
                    let d = level.d;
                    let mut items: Vec<Artifact> = level
                        .ball
                        .generators()
                        .iter()
                        .map(|g| Artifact::LevelSandwich { x: x.clone(), depth, d, f: g.clone() })
                        .collect();
                    items.extend((0..k).map(|_| Artifact::LevelSandwich { x: x.clone(), depth, d, f: random_vec(rng, d) }));
                    push(format!("{sn}: level {d} sandwich (l = {})", level.position), items);
                }
                let mut items: Vec<Artifact> = fr
                    .f_ball()
                    .generators()
                    .iter()
                    .map(|g| Artifact::FSandwich { x: x.clone(), depth, f: g.clone() })
                    .collect();
                items.extend((0..k).map(|_| Artifact::FSandwich { x: x.clone(), depth, f: random_vec(rng, depth) }));
                push(format!("{sn}: F sandwich"), items);
            }
        }
        "operators" => {
            for (sn, x, depth) in frame_spaces(cfg)? {
                let items = (0..k)
                    .map(|_| Artifact::Operators { x: x.clone(), depth, f: random_vec(rng, depth), y: random_vec(rng, x.dim) })
                    .collect();
                push(format!("{sn}: T and U"), items);
            }
        }
        "furthlemma" | "furthI" | "furthII" => {
            for (sn, x, depth) in frame_spaces(cfg)? {
                for n in 1..depth {
                    let items = (0..k)
                        .map(|_| {
                            let f = random_vec(rng, depth);
                            match name {
                                "furthlemma" => Artifact::Furthlemma { x: x.clone(), depth, f, n },
                                "furthI" => Artifact::FurthI { x: x.clone(), depth, f, d: n },
                                _ => Artifact::FurthII { x: x.clone(), depth, f, d: n, eps: cfg.eps.clone() },
                            }
                        })
                        .collect();
                    push(format!("{sn}: n = {n}"), items);
                }
            }
        }
        "betabound" => {
            for (sn, x, depth) in frame_spaces(cfg)? {
                for d in 1..depth {
                    let items = (0..k)
                        .map(|_| {
                            let mut f = random_vec(rng, depth);
                            for v in f.iter_mut().take(d) {
                                *v = Rat::zero();
                            }
                            if linalg::is_zero(&f) {
                                f[depth - 1] = Rat::one();
                            }
                            Artifact::Betabound { x: x.clone(), depth, f, d }
                        })
                        .collect();
                    push(format!("{sn}: beta bound past {d}"), items);
                }
                let fr = frame(&x, depth)?;
                let mut items: Vec<Artifact> =
                    (0..k).map(|_| Artifact::Betanull { x: x.clone(), depth, f: random_vec(rng, depth) }).collect();
                items.push(Artifact::Betanull { x: x.clone(), depth, f: linalg::zeros(depth) });
                // truncated image of U: relations hold except at the cut
                let y = random_vec(rng, x.dim);
                let u = fr.operator_u(&embedding::Sqrt3Vec::rational(y), fr.complete_blocks().max(1))?;
                items.push(Artifact::Betanull { x: x.clone(), depth, f: u.coeffs });
                push(format!("{sn}: beta null"), items);
                let items = (0..k)
                    .map(|_| Artifact::BetanullImage { y: random_vec(rng, x.dim), blocks: depth as u64 + 2 })
                    .collect();
                push(format!("{sn}: beta null on the image of U"), items);
            }
        }
        "alphabound" => {
            for (sn, x, depth) in frame_spaces(cfg)? {
                let items = (0..k).map(|_| Artifact::Alphabound { x: x.clone(), depth, f: random_vec(rng, depth) }).collect();
                push(format!("{sn}: alpha bound"), items);
            }
        }
        "rho-properties" => {
            let items = (0..k)
                .map(|_| {
                    let p = [random_rat(rng), random_rat(rng), random_rat(rng)];
                    let base = [random_pos(rng), random_pos(rng), random_pos(rng)];
                    let incr = [random_pos(rng), random_pos(rng), random_pos(rng)];
                    let flat_t = Rat::new(rng.gen_range(-6..=6), 6);
                    Artifact::RhoProperties { p, base, incr, flat_t, eps: cfg.eps.clone() }
                })
                .collect();
            push("rho: four properties".into(), items);
            push("rho: anchors".into(), vec![Artifact::RhoAnchors { eps: cfg.eps.clone() }]);
        }
        "segments" => {
            for (sn, x, depth) in frame_spaces(cfg)? {
                for which in [Which::I, Which::II] {
                    let items = (0..k)
                        .map(|_| Artifact::Segment {
                            x: x.clone(),
                            depth,
                            u: random_vec(rng, depth),
                            v: random_vec(rng, depth),
                            which,
                            eps: cfg.eps.clone(),
                        })
                        .filter(|a| !matches!(a, Artifact::Segment { u, v, .. } if u == v))
                        .collect();
                    push(format!("{sn}: random pairs, norm {which:?}"), items);
                    let ball = x.ball().ok_or(Error::ExactNormRequired)?;
                    let mut flats = Vec::new();
                    for _ in 0..k {
                        if let Some((a, b)) = facet_pair(rng, &ball) {
                            flats.push(Artifact::ImageSegment { x: x.clone(), depth, a, b, which });
                        }
                    }
                    if !flats.is_empty() {
                        push(format!("{sn}: flat segments on the image of U, norm {which:?}"), flats);
                    }
                }
            }
            let (fork, u, v) = flat_fork()?;
            let fork = Arc::new(fork);
            push("B: flat fork segment".into(), vec![Artifact::BSegment { tree: fork, u, v, expect_flat: true }]);
            for (i, tree) in random_trees(rng, 5, 20, 4)?.into_iter().enumerate() {
                let n = tree.node_count();
                let items = (0..k)
                    .map(|_| Artifact::BSegment { tree: tree.clone(), u: random_vec(rng, n), v: random_vec(rng, n), expect_flat: false })
                    .filter(|a| !matches!(a, Artifact::BSegment { u, v, .. } if u == v))
                    .collect();
                push(format!("B: random pairs, tree {i}"), items);
            }
        }
        "tree-monotone" => {
            for (i, tree) in random_trees(rng, 5, 20, 4)?.into_iter().enumerate() {
                let n = tree.node_count();
                let items = (0..k)
                    .map(|_| Artifact::TreeProjection { tree: tree.clone(), subtree: random_subtree(rng, &tree), x: random_vec(rng, n) })
                    .collect();
                push(format!("tree {i} ({n} nodes): projection contraction"), items);
            }
        }
        "tree-equivalence" => {
            for (i, tree) in random_trees(rng, 5, 20, 4)?.into_iter().enumerate() {
                let mut items = Vec::new();
                for leaf in 0..tree.leaves().len() {
                    let d = tree.chain(leaf).len();
                    for _ in 0..k.div_ceil(tree.leaves().len()) {
                        items.push(Artifact::TreeChain { tree: tree.clone(), leaf, x: random_vec(rng, d) });
                    }
                }
                push(format!("tree {i} ({} nodes): chain vectors", tree.node_count()), items);
                let depth = (0..tree.node_count()).map(|j| tree.depth_of(j)).max().unwrap_or(1);
                let samples = (0..k.min(20)).map(|_| random_vec(rng, depth)).collect();
                push(format!("tree {i}: level gain"), vec![Artifact::TreeConstants { tree: tree.clone(), samples }]);
            }
        }
        "b001" => {
            let consts: Vec<Rat> = (1..=8).map(renorming::b001_constant).collect();
            for (sn, x, depth) in frame_spaces(cfg)? {
                for which in [Which::I, Which::II] {
                    let items = (0..k)
                        .map(|_| Artifact::B001Frame { x: x.clone(), depth, which, z: random_vec(rng, depth), eps: cfg.eps.clone() })
                        .collect();
                    push(format!("{sn}: level gain, norm {which:?}"), items);
                }
            }
            push(
                "linf plane: negative control".into(),
                vec![Artifact::B001Space {
                    space: embedding::linf_plane(),
                    constants: consts[..2].to_vec(),
                    samples: Vec::new(),
                    expect_witness: true,
                }],
            );
        }
        "interp-contraction" => {
            for (i, tree) in random_trees(rng, 3, 6, 3)?.into_iter().enumerate() {
                let n = tree.node_count();
                let items = (0..k)
                    .map(|_| Artifact::InterpContraction {
                        tree: tree.clone(),
                        subtree: random_subtree(rng, &tree),
                        x: random_vec(rng, n),
                        levels: 6,
                        eps: cfg.eps.clone(),
                    })
                    .collect();
                push(format!("A of tree {i} ({n} nodes): contraction"), items);
            }
        }
        "interp-scale" => {
            let items = (0..k)
                .map(|_| {
                    let mut x = random_rat(rng);
                    if x.is_zero() {
                        x = Rat::one();
                    }
                    Artifact::InterpScaleLine { x, eps: cfg.eps.clone() }
                })
                .collect();
            push("line: ratio equals the series constant".into(), items);
            for (i, tree) in random_trees(rng, 2, 6, 3)?.into_iter().enumerate() {
                let n = tree.node_count();
                let mut items = Vec::new();
                for leaf in 0..tree.leaves().len() {
                    let chain = tree.chain(leaf);
                    let on_branch = |rng: &mut ChaCha8Rng| {
                        let mut v = linalg::zeros(n);
                        loop {
                            for &c in &chain {
                                v[c] = random_rat(rng);
                            }
                            if !linalg::is_zero(&v) {
                                return v.clone();
                            }
                        }
                    };
                    for _ in 0..k.div_ceil(tree.leaves().len()) {
                        let x = on_branch(rng);
                        let y = on_branch(rng);
                        items.push(Artifact::InterpBranchScale { tree: tree.clone(), leaf, x, y, levels: 6, eps: cfg.eps.clone() });
                    }
                }
                push(format!("A of tree {i}: branch subspaces"), items);
            }
        }
        other => return Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_aliases() {
        assert_eq!(canonical_suite("rho"), Some("rho-properties"));
        assert_eq!(canonical_suite("furthII"), Some("furthII"));
        assert!(canonical_suite("nope").is_none());
        assert!(run("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn artifact_roundtrip() {
        let a = Artifact::RhoAnchors { eps: Rat::pow2(-20) };
        let text = serde_json::to_string(&a).unwrap();
        let b: Artifact = serde_json::from_str(&text).unwrap();
        assert_eq!(evaluate(&b).verdict, Verdict::Pass);
    }

    #[test]
    fn rho_suite_is_deterministic() {
        let cfg = SuiteConfig { samples: 20, ..SuiteConfig::default() };
        let a = run("rho", &cfg).unwrap();
        let b = run("rho", &cfg).unwrap();
        assert!(a.passed());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn negative_control_is_rejected() {
        let a = Artifact::B001Space {
            space: embedding::linf_plane(),
            constants: vec![renorming::b001_constant(1), renorming::b001_constant(2)],
            samples: Vec::new(),
            expect_witness: false,
        };
        let o = evaluate(&a);
        assert_eq!(o.verdict, Verdict::Fail);
        assert!(o.detail.contains("n = 2"));
    }
}
