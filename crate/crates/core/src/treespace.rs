//! Norms on finitely supported systems over a finite tree: the supremum
//! over branches (`E`) and its variant with a weighted off-branch `ℓ₂`
//! term (`B`).
//!
//! Nodes are nonempty label sequences closed under nonempty initial
//! segments; leaves stand in for the branches. Coordinates of a tree
//! vector follow the node order (lexicographic in label positions, so
//! parents precede children).

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::CertInterval;
use crate::linalg::{self, RatVec};
use crate::polytope::PolytopeBall;
use crate::rat::Rat;
use crate::space::{BasisSpace, NormValue};

/// Largest tree accepted.
pub const MAX_NODES: usize = 64;

#[derive(Clone, Debug)]
pub struct FiniteTree {
    labels: Vec<String>,
    /// Label-index sequences in lexicographic order.
    nodes: Vec<Vec<usize>>,
    /// Node indices of the leaves, in node order.
    leaves: Vec<usize>,
    /// Branch space of each leaf, aligned with `leaves`.
    branches: Vec<BasisSpace>,
    /// `c_n` for `n = 1, 2, ...`; empty when only `E` is used.
    constants: Vec<Rat>,
    e_ball: Arc<OnceLock<std::result::Result<PolytopeBall, Error>>>,
}

/// `B` value with the lowest leaf attaining the maximum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BValue {
    pub value: NormValue,
    pub leaf: String,
}

fn is_prefix(a: &[usize], b: &[usize]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

impl FiniteTree {
    /// Tree from label sequences and the branch space of every leaf
    /// (keyed by the leaf path `l1/l2/...`). Checks closure under initial
    /// segments, branch dimensions and pairwise coherence of the leaves.
    pub fn new(
        labels: Vec<String>,
        nodes: Vec<Vec<String>>,
        branch_norms: BTreeMap<String, BasisSpace>,
        constants: Vec<Rat>,
    ) -> Result<FiniteTree> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("tree has no nodes".into()));
        }
        if nodes.len() > MAX_NODES {
            return Err(Error::ResourceGuard(format!("{} nodes exceed the cap {MAX_NODES}", nodes.len())));
        }
        for l in &labels {
            if l.contains('/') || l.is_empty() {
                return Err(Error::InvalidArgument(format!("label {l:?} must be nonempty without '/'")));
            }
        }
        let index = |s: &String| {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown label {s:?}")))
        };
        let mut idx_nodes: Vec<Vec<usize>> = Vec::with_capacity(nodes.len());
        for n in &nodes {
            if n.is_empty() {
                return Err(Error::InvalidArgument("the empty sequence is not a node".into()));
            }
            idx_nodes.push(n.iter().map(index).collect::<Result<_>>()?);
        }
        idx_nodes.sort();
        idx_nodes.dedup();
        for n in &idx_nodes {
            if n.len() > 1 && idx_nodes.binary_search(&n[..n.len() - 1].to_vec()).is_err() {
                return Err(Error::InvalidArgument("node set is not closed under initial segments".into()));
            }
        }
        let leaves: Vec<usize> = (0..idx_nodes.len())
            .filter(|&i| !idx_nodes.iter().any(|m| m.len() > idx_nodes[i].len() && is_prefix(&idx_nodes[i], m)))
            .collect();
        let path = |n: &[usize]| n.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join("/");
        let mut branches = Vec::with_capacity(leaves.len());
        for &l in &leaves {
            let key = path(&idx_nodes[l]);
            let space = branch_norms
                .get(&key)
                .ok_or_else(|| Error::InvalidArgument(format!("no branch norm for leaf {key}")))?;
            space.validate()?;
            if space.dim != idx_nodes[l].len() {
                return Err(Error::DimensionMismatch { expected: idx_nodes[l].len(), got: space.dim });
            }
            branches.push(space.clone());
        }
        for c in &constants {
            if !c.is_positive() {
                return Err(Error::InvalidArgument("constants must be positive".into()));
            }
        }
        let tree = FiniteTree { labels, nodes: idx_nodes, leaves, branches, constants, e_ball: Arc::default() };
        tree.check_coherence()?;
        Ok(tree)
    }

    /// Leaves sharing an initial segment of length `l` carry 1-equivalent
    /// branch bases on their first `l` vectors.
    fn check_coherence(&self) -> Result<()> {
        for a in 0..self.leaves.len() {
            for b in a + 1..self.leaves.len() {
                let na = &self.nodes[self.leaves[a]];
                let nb = &self.nodes[self.leaves[b]];
                let meet = na.iter().zip(nb).take_while(|(x, y)| x == y).count();
                if meet == 0 {
                    continue;
                }
                if !BasisSpace::one_equivalent(&self.branches[a], &self.branches[b], meet)? {
                    return Err(Error::Coherence(self.path(self.leaves[a]), self.path(self.leaves[b])));
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn path(&self, node: usize) -> String {
        self.nodes[node].iter().map(|&i| self.labels[i].as_str()).collect::<Vec<_>>().join("/")
    }

    pub fn node_paths(&self) -> Vec<String> {
        (0..self.nodes.len()).map(|i| self.path(i)).collect()
    }

    pub fn node_index(&self, path: &str) -> Option<usize> {
        (0..self.nodes.len()).find(|&i| self.path(i) == path)
    }

    pub fn depth_of(&self, node: usize) -> usize {
        self.nodes[node].len()
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn branch(&self, leaf_pos: usize) -> &BasisSpace {
        &self.branches[leaf_pos]
    }

    pub fn constants(&self) -> &[Rat] {
        &self.constants
    }

    pub fn with_constants(mut self, constants: Vec<Rat>) -> Result<FiniteTree> {
        if constants.iter().any(|c| !c.is_positive()) {
            return Err(Error::InvalidArgument("constants must be positive".into()));
        }
        self.constants = constants;
        Ok(self)
    }

    /// Node indices of the chain `σ|1, σ|2, ..., σ` of a leaf.
    pub fn chain(&self, leaf_pos: usize) -> Vec<usize> {
        let leaf = &self.nodes[self.leaves[leaf_pos]];
        (1..=leaf.len())
            .map(|l| self.nodes.binary_search(&leaf[..l].to_vec()).expect("closed under prefixes"))
            .collect()
    }

    pub fn all_branches_polytope(&self) -> bool {
        self.branches.iter().all(|b| b.ball().is_some())
    }

    fn check(&self, x: &[Rat]) -> Result<()> {
        if x.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch { expected: self.nodes.len(), got: x.len() });
        }
        Ok(())
    }

    /// `Σ_{η ⊂ σ} x(η) f^σ_{|η|}` as a vector of the branch space.
    pub fn branch_vector(&self, leaf_pos: usize, x: &[Rat]) -> RatVec {
        self.chain(leaf_pos).iter().map(|&i| x[i].clone()).collect()
    }

    fn branch_values(&self, x: &[Rat]) -> Result<Vec<NormValue>> {
        (0..self.leaves.len())
            .into_par_iter()
            .map(|p| self.branches[p].eval_norm(&self.branch_vector(p, x)))
            .collect()
    }

    /// `max_σ ‖Σ_{η ⊂ σ} x(η) f^σ_{|η|}‖_σ`.
    pub fn e_norm(&self, x: &[Rat]) -> Result<NormValue> {
        self.check(x)?;
        Ok(NormValue::max_of(&self.branch_values(x)?))
    }

    fn constant(&self, level: usize) -> Result<&Rat> {
        self.constants
            .get(level - 1)
            .ok_or_else(|| Error::InvalidArgument(format!("no constant c_{level}")))
    }

    /// Squared `B` value at one leaf, as an enclosure (a point when exact).
    fn b_leaf_sq(&self, leaf_pos: usize, branch: &NormValue, x: &[Rat]) -> Result<(Option<Rat>, CertInterval)> {
        let chain = self.chain(leaf_pos);
        let mut off = Rat::zero();
        for (i, v) in x.iter().enumerate() {
            if !v.is_zero() && !chain.contains(&i) {
                off += &(self.constant(self.nodes[i].len())?.square() * v.square());
            }
        }
        match branch.square() {
            Some(sq) => {
                let t = sq + off;
                Ok((Some(t.clone()), CertInterval::point(t)))
            }
            None => Ok((None, branch.square_enclosure().add_rat(&off))),
        }
    }

    /// `max_σ (‖Σ_{η ⊂ σ} x(η) f^σ_{|η|}‖²_σ + Σ_{η ⊄ σ} c²_{|η|} x(η)²)^{1/2}`
    /// with the lowest leaf attaining the maximum.
    pub fn b_norm(&self, x: &[Rat]) -> Result<BValue> {
        self.check(x)?;
        let vals = self.branch_values(x)?;
        let mut exact: Vec<Option<Rat>> = Vec::with_capacity(vals.len());
        let mut ivs = Vec::with_capacity(vals.len());
        for (p, v) in vals.iter().enumerate() {
            let (e, iv) = self.b_leaf_sq(p, v, x)?;
            exact.push(e);
            ivs.push(iv);
        }
        if exact.iter().all(Option::is_some) {
            let sq: Vec<Rat> = exact.into_iter().map(Option::unwrap).collect();
            let best = sq.iter().max().cloned().unwrap_or_default();
            let p = sq.iter().position(|s| *s == best).expect("nonempty");
            return Ok(BValue { value: NormValue::from_square(best), leaf: self.path(self.leaves[p]) });
        }
        let lo = ivs.iter().map(|i| i.lo.clone()).max().unwrap_or_default();
        let hi = ivs.iter().map(|i| i.hi.clone()).max().unwrap_or_default();
        let p = ivs.iter().position(|i| i.hi >= lo).expect("nonempty");
        let sq = CertInterval { lo, hi };
        Ok(BValue {
            value: NormValue::Enclosure(sq.sqrt(&Rat::pow2(-64))),
            leaf: self.path(self.leaves[p]),
        })
    }

    /// `1_S · x` for a subtree `S` (closed under nonempty initial segments).
    pub fn subtree_projection(&self, subtree: &[usize], x: &[Rat]) -> Result<RatVec> {
        self.check(x)?;
        for &s in subtree {
            if s >= self.nodes.len() {
                return Err(Error::OutOfRange(format!("node {s}")));
            }
            let n = &self.nodes[s];
            if n.len() > 1 {
                let parent = self.nodes.binary_search(&n[..n.len() - 1].to_vec()).expect("closed");
                if !subtree.contains(&parent) {
                    return Err(Error::InvalidArgument(format!("{} is in S but its parent is not", self.path(s))));
                }
            }
        }
        Ok(x.iter()
            .enumerate()
            .map(|(i, v)| if subtree.contains(&i) { v.clone() } else { Rat::zero() })
            .collect())
    }

    /// Embedded generators of one branch ball.
    fn branch_points(&self, leaf_pos: usize) -> Result<Vec<RatVec>> {
        let ball = self.branches[leaf_pos].ball().ok_or(Error::ExactNormRequired)?;
        Ok(ball.embed_points(self.nodes.len(), &self.chain(leaf_pos)))
    }

    /// `co(Φ)`, the hull of the union of the branch balls placed along
    /// their chains.
    pub fn phi_ball(&self) -> Result<PolytopeBall> {
        let mut pts = Vec::new();
        for p in 0..self.leaves.len() {
            pts.extend(self.branch_points(p)?);
        }
        PolytopeBall::new(self.nodes.len(), pts)
    }

    /// Unit ball of `E`: the intersection of the branch cylinders.
    pub fn e_ball(&self) -> Result<PolytopeBall> {
        self.e_ball
            .get_or_init(|| {
                let mut rows = Vec::new();
                for p in 0..self.leaves.len() {
                    let ball = self.branches[p].ball().ok_or(Error::ExactNormRequired)?;
                    let chain = self.chain(p);
                    for a in ball.hrep() {
                        let mut row = linalg::zeros(self.nodes.len());
                        for (j, &c) in chain.iter().enumerate() {
                            row[c] = a[j].clone();
                        }
                        rows.push(row);
                    }
                }
                PolytopeBall::from_inequalities(self.nodes.len(), rows)
            })
            .clone()
    }

    /// Squared-form level gain on every branch space.
    pub fn verify_constants(&self, samples: &[RatVec]) -> Result<()> {
        for (p, space) in self.branches.iter().enumerate() {
            let k = space.dim;
            let cs: Vec<Rat> = (1..=k).map(|n| self.constant(n).cloned()).collect::<Result<_>>()?;
            let local: Vec<RatVec> = samples.iter().map(|s| s.iter().take(k).cloned().collect()).collect();
            let report = verify_b001(space, &cs, &local)?;
            if let Some(w) = report.witness {
                return Err(Error::Precondition(format!(
                    "level gain fails on branch {} at n = {}: {:?}",
                    self.path(self.leaves[p]),
                    w.n,
                    linalg::fmt_vec(&w.vector)
                )));
            }
        }
        Ok(())
    }
}

/// Failure of `‖π_n f‖² >= ‖π_{n-1} f‖² + c_n² |f_n|²`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct B001Witness {
    pub n: usize,
    pub vector: RatVec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct B001Report {
    pub checked: usize,
    /// Lower bound of the smallest observed slack.
    pub min_slack: Option<Rat>,
    pub witness: Option<B001Witness>,
}

/// Checks the level gain on the supplied vectors, every basis vector and
/// sum of two basis vectors, and every ball generator when the norm is a
/// polytope gauge.
pub fn verify_b001(space: &BasisSpace, constants: &[Rat], samples: &[RatVec]) -> Result<B001Report> {
    let d = space.dim;
    if constants.len() < d {
        return Err(Error::InvalidArgument(format!("need {d} constants, got {}", constants.len())));
    }
    let mut probes: Vec<RatVec> = Vec::new();
    for i in 0..d {
        probes.push(linalg::unit(d, i));
        for j in i + 1..d {
            probes.push(linalg::add(&linalg::unit(d, i), &linalg::unit(d, j)));
        }
    }
    if let Some(ball) = space.ball() {
        probes.extend(ball.generators().iter().cloned());
    }
    probes.extend(samples.iter().filter(|s| s.len() == d).cloned());
    let mut min_slack: Option<Rat> = None;
    for f in &probes {
        let mut prev = NormValue::Exact(Rat::zero());
        for n in 1..=d {
            let pn = crate::space::partial_sum(n, f)?;
            let cur = space.eval_norm(&pn)?;
            let gain = constants[n - 1].square() * f[n - 1].square();
            let slack = match (cur.square(), prev.square()) {
                (Some(a), Some(b)) => CertInterval::point(a - b - &gain),
                _ => decide_gain(space, f, n, &gain)?,
            };
            if slack.hi.is_negative() {
                return Ok(B001Report {
                    checked: probes.len(),
                    min_slack: Some(slack.lo),
                    witness: Some(B001Witness { n, vector: f.clone() }),
                });
            }
            if slack.lo.is_negative() && !f[n - 1].is_zero() {
                return Err(Error::Undecided(format!("level gain at n = {n}")));
            }
            min_slack = Some(match min_slack {
                None => slack.lo.clone(),
                Some(m) => m.min(slack.lo.clone()),
            });
            prev = cur;
        }
    }
    Ok(B001Report { checked: probes.len(), min_slack, witness: None })
}

/// Slack enclosure of the level gain for norms evaluated by enclosure,
/// tightening the evaluation width until the sign is known.
fn decide_gain(space: &BasisSpace, f: &[Rat], n: usize, gain: &Rat) -> Result<CertInterval> {
    let pn = crate::space::partial_sum(n, f)?;
    let pm = crate::space::partial_sum(n - 1, f)?;
    if pn == pm {
        return Ok(CertInterval::point(Rat::zero()));
    }
    let mut eps = Rat::pow2(-30);
    loop {
        let a = space.norm.eval_eps(&pn, &eps)?.enclose(&eps).square_nonneg();
        let b = space.norm.eval_eps(&pm, &eps)?.enclose(&eps).square_nonneg();
        let slack = a.sub(&b).add_rat(&-gain);
        if !slack.lo.is_negative() || slack.hi.is_negative() {
            return Ok(slack);
        }
        eps = &eps * Rat::pow2(-16);
        if eps < Rat::pow2(-200) {
            return Ok(slack);
        }
    }
}

/// Outcome of a segment test for `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BSegmentVerdict {
    pub constant: bool,
    pub leaf: Option<String>,
    /// `v - u` supported on the chain of the attaining leaf.
    pub on_chain: Option<bool>,
    /// `[P_σ u, P_σ v]` still flat for the branch norm.
    pub projected_flat: Option<bool>,
}

/// Constancy of `B` on `[u, v]` at the midpoint; when constant, checks
/// that the segment lives on the chain of the attaining leaf and stays
/// flat after projecting onto it.
pub fn b_segment_check(tree: &FiniteTree, u: &[Rat], v: &[Rat]) -> Result<BSegmentVerdict> {
    if u == v {
        return Err(Error::Precondition("segment endpoints must differ".into()));
    }
    let mid = linalg::scale(&linalg::add(u, v), &Rat::new(1, 2));
    let bu = tree.b_norm(u)?;
    let bv = tree.b_norm(v)?;
    let bm = tree.b_norm(&mid)?;
    let sq = |b: &BValue| b.value.square().ok_or(Error::ExactNormRequired);
    let constant = sq(&bu)? == sq(&bv)? && sq(&bu)? == sq(&bm)?;
    if !constant {
        return Ok(BSegmentVerdict { constant, leaf: None, on_chain: None, projected_flat: None });
    }
    let leaf_node = tree.node_index(&bm.leaf).expect("leaf path");
    let leaf_pos = tree.leaves.iter().position(|&l| l == leaf_node).expect("leaf");
    let chain = tree.chain(leaf_pos);
    let diff = linalg::sub(v, u);
    let on_chain = diff.iter().enumerate().all(|(i, d)| d.is_zero() || chain.contains(&i));
    let space = tree.branch(leaf_pos);
    let pu = tree.branch_vector(leaf_pos, u);
    let pv = tree.branch_vector(leaf_pos, v);
    let pm = tree.branch_vector(leaf_pos, &mid);
    let a = space.eval_norm(&pu)?.square();
    let flat = pu != pv && a.is_some() && a == space.eval_norm(&pv)?.square() && a == space.eval_norm(&pm)?.square();
    Ok(BSegmentVerdict { constant, leaf: Some(bm.leaf), on_chain: Some(on_chain), projected_flat: Some(flat) })
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    labels: Vec<String>,
    nodes: Vec<Vec<String>>,
    branch_norms: BTreeMap<String, BasisSpace>,
    #[serde(default)]
    constants: Vec<Rat>,
}

impl Serialize for FiniteTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| n.iter().map(|&i| self.labels[i].clone()).collect())
            .collect();
        let branch_norms = self
            .leaves
            .iter()
            .zip(&self.branches)
            .map(|(&l, b)| (self.path(l), b.clone()))
            .collect();
        TreeDoc { labels: self.labels.clone(), nodes, branch_norms, constants: self.constants.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<FiniteTree, D::Error> {
        let doc = TreeDoc::deserialize(d)?;
        FiniteTree::new(doc.labels, doc.nodes, doc.branch_norms, doc.constants).map_err(serde::de::Error::custom)
    }
}

/// Random rational in `(-1, 1)` with denominator at most `den`.
fn small_rat<R: Rng>(rng: &mut R, den: i64) -> Rat {
    let q = rng.gen_range(1..=den);
    Rat::new(rng.gen_range(-(q - 1)..=(q - 1)), q)
}

/// Extension of a monotone normalized ball: generators `V × {0}`, `e_d`
/// and `(p, 1)` for a point `p` of the half ball. Its section is the
/// parent, the new basis vector has norm 1 and monotonicity is kept.
pub fn random_extension<R: Rng>(rng: &mut R, parent: &PolytopeBall) -> Result<PolytopeBall> {
    let d = parent.dim();
    let gens = parent.generators();
    let mut p = linalg::zeros(d);
    for g in gens {
        let w = small_rat(rng, 4).abs() / Rat::int(gens.len() as i64 * 2);
        p = linalg::add(&p, &linalg::scale(g, &w));
    }
    let mut pts: Vec<RatVec> = gens
        .iter()
        .map(|g| {
            let mut v = g.clone();
            v.push(Rat::zero());
            v
        })
        .collect();
    let mut top = linalg::zeros(d);
    top.push(Rat::one());
    pts.push(top);
    p.push(Rat::one());
    pts.push(p);
    PolytopeBall::new(d + 1, pts)
}

/// Random coherent tree with at most `max_nodes` nodes and depth at most
/// `max_depth`; branch norms are nested random extensions of `[-1, 1]`.
pub fn random_coherent_tree<R: Rng>(rng: &mut R, max_nodes: usize, max_depth: usize) -> Result<FiniteTree> {
    let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let seg = PolytopeBall::new(1, vec![vec![Rat::one()]])?;
    let mut nodes: Vec<(Vec<usize>, PolytopeBall)> = Vec::new();
    let roots = rng.gen_range(1..=2);
    let mut queue = Vec::new();
    for r in 0..roots {
        nodes.push((vec![r], seg.clone()));
        queue.push(nodes.len() - 1);
    }
    while let Some(i) = queue.pop() {
        let (path, ball) = nodes[i].clone();
        if path.len() >= max_depth {
            continue;
        }
        let kids = rng.gen_range(0..=2);
        for c in 0..kids {
            if nodes.len() >= max_nodes {
                break;
            }
            let mut child = path.clone();
            child.push(c);
            let ext = random_extension(rng, &ball)?;
            nodes.push((child, ext));
            queue.push(nodes.len() - 1);
        }
    }
    let name = |p: &[usize]| p.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>();
    let all: Vec<Vec<usize>> = nodes.iter().map(|n| n.0.clone()).collect();
    let mut norms = BTreeMap::new();
    for (path, ball) in &nodes {
        let is_leaf = !all.iter().any(|m| m.len() > path.len() && is_prefix(path, m));
        if is_leaf {
            norms.insert(name(path).join("/"), BasisSpace::polytope(ball.clone()));
        }
    }
    let constants = (1..=max_depth).map(|n| Rat::new(7, 1) * Rat::pow2(-(2 * n as i64 + 8))).collect();
    FiniteTree::new(labels.clone(), all.iter().map(|p| name(p)).collect(), norms, constants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn fork(branch: BasisSpace, constants: Vec<Rat>) -> FiniteTree {
        let mut norms = BTreeMap::new();
        norms.insert(s("a/b"), branch.clone());
        norms.insert(s("a/c"), branch);
        FiniteTree::new(
            vec![s("a"), s("b"), s("c")],
            vec![vec![s("a")], vec![s("a"), s("b")], vec![s("a"), s("c")]],
            norms,
            constants,
        )
        .unwrap()
    }

    fn l1() -> BasisSpace {
        BasisSpace::polytope(PolytopeBall::new(2, vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]]).unwrap())
    }

    fn v(xs: &[i64]) -> RatVec {
        xs.iter().map(|&x| Rat::int(x)).collect()
    }

    #[test]
    fn euclidean_fork() {
        let c2 = Rat::new(7, 4096);
        let t = fork(BasisSpace::euclidean(2), vec![Rat::one(), c2.clone()]);
        assert_eq!(t.node_paths(), vec!["a", "a/b", "a/c"]);
        assert_eq!(t.e_norm(&v(&[1, 1, 0])).unwrap(), NormValue::Sqrt(Rat::int(2)));
        assert_eq!(t.e_norm(&v(&[0, 1, 1])).unwrap(), NormValue::Exact(Rat::one()));
        let b = t.b_norm(&v(&[0, 1, 1])).unwrap();
        assert_eq!(b.value.square().unwrap(), Rat::one() + c2.square());
        assert_eq!(b.leaf, "a/b");
    }

    #[test]
    fn phi_gauge_on_fork() {
        let t = fork(l1(), vec![Rat::one(), Rat::one()]);
        let phi = t.phi_ball().unwrap();
        assert_eq!(phi.gauge(&v(&[0, 1, 1])).unwrap(), Rat::int(2));
        for i in 0..3 {
            assert_eq!(phi.gauge(&linalg::unit(3, i)).unwrap(), Rat::one());
        }
        let e = t.e_ball().unwrap();
        assert_eq!(e.gauge(&v(&[0, 1, 1])).unwrap(), Rat::one());
    }

    #[test]
    fn incoherent_leaves_are_rejected() {
        let mut norms = BTreeMap::new();
        norms.insert(s("a/b"), l1());
        let wide = PolytopeBall::new(2, vec![vec![Rat::int(2), Rat::zero()], vec![Rat::zero(), Rat::one()]]).unwrap();
        norms.insert(s("a/c"), BasisSpace::polytope(wide));
        let err = FiniteTree::new(
            vec![s("a"), s("b"), s("c")],
            vec![vec![s("a")], vec![s("a"), s("b")], vec![s("a"), s("c")]],
            norms,
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, Error::Coherence(s("a/b"), s("a/c")));
    }

    #[test]
    fn flat_b_segment() {
        let t = fork(l1(), vec![Rat::one(), Rat::one()]);
        let verdict = b_segment_check(&t, &v(&[1, 0, 0]), &v(&[0, 1, 0])).unwrap();
        assert!(verdict.constant);
        assert_eq!(verdict.leaf.as_deref(), Some("a/b"));
        assert_eq!(verdict.on_chain, Some(true));
        assert_eq!(verdict.projected_flat, Some(true));
        let verdict = b_segment_check(&t, &v(&[0, 1, 0]), &v(&[0, 0, 1])).unwrap();
        assert!(!verdict.constant);
    }

    #[test]
    fn level_gain_controls() {
        let c: Vec<Rat> = (1..=2).map(|n| Rat::new(7, 1) * Rat::pow2(-(2 * n + 8))).collect();
        assert!(verify_b001(&BasisSpace::euclidean(2), &[Rat::one(), Rat::one()], &[]).unwrap().witness.is_none());
        let sq = BasisSpace::polytope(PolytopeBall::new(2, vec![v(&[1, 1]), v(&[1, -1])]).unwrap());
        let w = verify_b001(&sq, &c, &[]).unwrap().witness.unwrap();
        assert_eq!(w.n, 2);
    }

    #[test]
    fn random_trees_are_coherent_and_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let t = random_coherent_tree(&mut rng, 12, 3).unwrap();
            for p in 0..t.leaves().len() {
                let ball = t.branch(p).ball().unwrap();
                assert!(crate::space::polytope_monotone_witness(&ball).unwrap().is_none());
                for i in 0..ball.dim() {
                    assert_eq!(ball.gauge(&linalg::unit(ball.dim(), i)).unwrap(), Rat::one());
                }
            }
            let back: FiniteTree = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
            assert_eq!(back.node_paths(), t.node_paths());
        }
    }
}
