//! Index machinery and the canonical enumeration of monotone rational norms.
//!
//! Enumeration order at fixed dimension `d`: generator lists of `m >= d`
//! sign-normalized vectors, strictly increasing in lexicographic value
//! order, are ordered by total encoding size of all coordinates, then by
//! `m`, then lexicographically by value. A list is kept when it spans
//! `R^d`, none of its members is redundant, and the coordinate basis is
//! monotone for the resulting ball. Lists without redundant members are
//! exactly the canonical extreme point lists, so every norm appears once.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RatVec};
use crate::polytope::{self, PolytopeBall};
use crate::rat::Rat;
use crate::space;

/// Largest dimension accepted by the enumeration.
pub const MAX_DIM: usize = 8;

/// Cantor diagonal bijection `N -> N x N`: `1 -> (1,1), 2 -> (1,2),
/// 3 -> (2,1), 4 -> (1,3), ...`.
pub fn pi(i: u64) -> (u64, u64) {
    assert!(i >= 1, "pi is defined on positive integers");
    // diagonal t holds t pairs with n + k = t + 1
    let mut t = (((8 * i as u128 + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while t * (t + 1) / 2 < i {
        t += 1;
    }
    while t > 1 && (t - 1) * t / 2 >= i {
        t -= 1;
    }
    let n = i - (t - 1) * t / 2;
    (n, t + 1 - n)
}

pub fn pi_inverse(n: u64, k: u64) -> u64 {
    assert!(n >= 1 && k >= 1);
    let s = n + k;
    (s - 1) * (s - 2) / 2 + n
}

/// Number of ways to write `w` as an ordered sum of parts `>= 2`
/// (`w = 0` counts the empty sum).
fn compositions(w: u64) -> u128 {
    let mut c = vec![0u128; (w as usize) + 1];
    c[0] = 1;
    for x in 2..=w as usize {
        c[x] = (2..=x).map(|p| c[x - p]).sum();
    }
    c[w as usize]
}

fn weight(eta: &[u64]) -> u64 {
    eta.iter().map(|&e| e + 1).sum()
}

/// Enumeration of nonempty finite sequences of positive integers by weight
/// `|eta| + sum(eta)`, lexicographically within a weight. Parents precede
/// children because appending a term raises the weight.
pub fn varpi(i: u64) -> Vec<u64> {
    assert!(i >= 1);
    let mut rem = i as u128;
    let mut w = 2u64;
    loop {
        let c = compositions(w);
        if rem <= c {
            break;
        }
        rem -= c;
        w += 1;
    }
    // rem is the 1-based rank within weight w
    let mut out = Vec::new();
    let mut left = w;
    while left > 0 {
        let mut v = 1u64;
        loop {
            let after = left - (v + 1);
            let c = compositions(after);
            if rem <= c {
                out.push(v);
                left = after;
                break;
            }
            rem -= c;
            v += 1;
        }
    }
    out
}

pub fn varpi_inverse(eta: &[u64]) -> u64 {
    assert!(!eta.is_empty() && eta.iter().all(|&e| e >= 1));
    let w = weight(eta);
    let mut idx: u128 = (2..w).map(compositions).sum();
    let mut left = w;
    for &e in eta {
        for v in 1..e {
            idx += compositions(left - (v + 1));
        }
        left -= e + 1;
    }
    (idx + 1) as u64
}

/// `(varpi^-1((p1)), varpi^-1((p1,p2)), ...)` for a finite prefix.
pub fn delta(prefix: &[u64]) -> Vec<u64> {
    (1..=prefix.len()).map(|l| varpi_inverse(&prefix[..l])).collect()
}

/// Rationals of encoding size exactly `s`, ascending.
pub fn rationals_of_size(s: u64) -> Vec<Rat> {
    let mut out = Vec::new();
    for neg in [false, true] {
        let budget = s.saturating_sub(u64::from(neg));
        for a in 1..budget {
            let b = budget - a;
            if b == 0 {
                continue;
            }
            let (plo, phi) = range_of_bitlen(a);
            let (mut qlo, qhi) = range_of_bitlen(b);
            if qlo == BigInt::from(0) {
                qlo = BigInt::one();
            }
            let mut p = plo.clone();
            while p < phi {
                let mut q = qlo.clone();
                while q < qhi {
                    let zero = p == BigInt::from(0);
                    let ok = if zero { q.is_one() && !neg } else { p.gcd(&q).is_one() };
                    if ok {
                        let num = if neg { -p.clone() } else { p.clone() };
                        out.push(Rat::from_big(num, q.clone()));
                    }
                    q += 1;
                }
                p += 1;
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn range_of_bitlen(a: u64) -> (BigInt, BigInt) {
    if a == 1 {
        (BigInt::from(0), BigInt::from(2))
    } else {
        (BigInt::one() << ((a - 1) as usize), BigInt::one() << (a as usize))
    }
}

/// Exact monotonicity decision with a witness (projected generator) on
/// failure.
pub fn monotone_witness(ball: &PolytopeBall) -> Result<Option<(usize, RatVec)>> {
    space::polytope_monotone_witness(ball)
}

struct DimState {
    entries: Vec<PolytopeBall>,
    /// Next bucket to generate: (total size, generator count).
    size: u64,
    count: usize,
    pool: HashMap<u64, Vec<(u64, RatVec)>>,
}

fn catalog_state() -> &'static Mutex<HashMap<usize, DimState>> {
    static STATE: OnceLock<Mutex<HashMap<usize, DimState>>> = OnceLock::new();
    STATE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Hard ceiling on the total encoding size explored.
pub const MAX_TOTAL_SIZE: u64 = 40;

/// Sign-normalized nonzero vectors of total size exactly `s`, ascending.
fn vectors_of_size(d: usize, s: u64) -> Vec<RatVec> {
    fn rec(d: usize, s: u64, prefix: &mut RatVec, out: &mut Vec<RatVec>, cache: &mut HashMap<u64, Vec<Rat>>) {
        if prefix.len() == d - 1 {
            if s < 2 {
                return;
            }
            let vals = cache.entry(s).or_insert_with(|| rationals_of_size(s)).clone();
            for v in vals {
                prefix.push(v);
                if !linalg::is_zero(prefix) && linalg::sign_normalize(prefix) == *prefix {
                    out.push(prefix.clone());
                }
                prefix.pop();
            }
            return;
        }
        let rest = 2 * (d - prefix.len() - 1) as u64;
        for cs in 2..=s.saturating_sub(rest) {
            let vals = cache.entry(cs).or_insert_with(|| rationals_of_size(cs)).clone();
            for v in vals {
                prefix.push(v);
                rec(d, s - cs, prefix, out, cache);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut cache = HashMap::new();
    rec(d, s, &mut Vec::new(), &mut out, &mut cache);
    out.sort_by(|a, b| linalg::lex_cmp(a, b));
    out
}

impl DimState {
    fn new(d: usize) -> DimState {
        DimState { entries: Vec::new(), size: 2 * d as u64 * d as u64, count: d, pool: HashMap::new() }
    }

    fn pool_upto(&mut self, d: usize, max: u64) -> Vec<(u64, RatVec)> {
        let mut all = Vec::new();
        for s in (2 * d as u64)..=max {
            let v = self
                .pool
                .entry(s)
                .or_insert_with(|| vectors_of_size(d, s).into_iter().map(|v| (s, v)).collect());
            all.extend(v.iter().cloned());
        }
        all.sort_by(|a, b| linalg::lex_cmp(&a.1, &b.1));
        all
    }

    /// Generate the current bucket and advance.
    fn step(&mut self, d: usize) -> Result<()> {
        let size = self.size;
        let m = self.count;
        if size > MAX_TOTAL_SIZE {
            return Err(Error::ResourceGuard(format!(
                "catalog enumeration in dimension {d} reached total size {size}"
            )));
        }
        let max_vec = size - 2 * d as u64 * (m as u64 - 1);
        let pool = self.pool_upto(d, max_vec);
        let mut lists: Vec<Vec<RatVec>> = Vec::new();
        let mut chosen: Vec<usize> = Vec::new();
        fn dfs(
            pool: &[(u64, RatVec)],
            start: usize,
            left: u64,
            m: usize,
            min_each: u64,
            chosen: &mut Vec<usize>,
            out: &mut Vec<Vec<RatVec>>,
        ) {
            if chosen.len() == m {
                if left == 0 {
                    out.push(chosen.iter().map(|&i| pool[i].1.clone()).collect());
                }
                return;
            }
            let remaining_after = (m - chosen.len() - 1) as u64 * min_each;
            for i in start..pool.len() {
                let s = pool[i].0;
                if s + remaining_after > left {
                    continue;
                }
                chosen.push(i);
                dfs(pool, i + 1, left - s, m, min_each, chosen, out);
                chosen.pop();
            }
        }
        dfs(&pool, 0, size, m, 2 * d as u64, &mut chosen, &mut lists);
        use rayon::prelude::*;
        let accepted: Vec<Option<PolytopeBall>> = lists
            .par_iter()
            .map(|list| accept(d, list))
            .collect();
        self.entries.extend(accepted.into_iter().flatten());
        // advance (size, m); in dimension 1 a second generator is always redundant
        if d > 1 && (self.count + 1) as u64 * 2 * d as u64 <= size {
            self.count += 1;
        } else {
            self.size += 1;
            self.count = d;
        }
        Ok(())
    }
}

fn accept(d: usize, list: &[RatVec]) -> Option<PolytopeBall> {
    if linalg::rank(list) < d {
        return None;
    }
    if polytope::prune_redundant(list).len() != list.len() {
        return None;
    }
    let ball = PolytopeBall::from_points_unpruned(d, list.to_vec()).ok()?;
    match space::polytope_monotone_witness(&ball) {
        Ok(None) => Some(ball),
        _ => None,
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::OutOfRange(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// Entries `1..=count` of the catalog in dimension `d`.
pub fn catalog_prefix(d: usize, count: usize) -> Result<Vec<PolytopeBall>> {
    check_dim(d)?;
    let mut guard = catalog_state().lock().expect("catalog lock");
    let state = guard.entry(d).or_insert_with(|| DimState::new(d));
    while state.entries.len() < count {
        state.step(d)?;
    }
    Ok(state.entries[..count].to_vec())
}

/// The `l`-th monotone rational norm on `R^d` (1-based).
pub fn rational_ball(d: usize, l: usize) -> Result<PolytopeBall> {
    if l == 0 {
        return Err(Error::OutOfRange("catalog index starts at 1".into()));
    }
    Ok(catalog_prefix(d, l)?.pop().expect("nonempty"))
}

/// Visit catalog entries of dimension `d` in order, starting at index 1,
/// until `f` returns `Some` or the entry budget runs out.
pub fn scan<T>(d: usize, budget: usize, mut f: impl FnMut(usize, &PolytopeBall) -> Option<T>) -> Result<Option<T>> {
    check_dim(d)?;
    let mut idx = 0;
    loop {
        let batch = {
            let mut guard = catalog_state().lock().expect("catalog lock");
            let state = guard.entry(d).or_insert_with(|| DimState::new(d));
            while state.entries.len() <= idx {
                state.step(d)?;
            }
            state.entries[idx..].to_vec()
        };
        for ball in batch {
            idx += 1;
            if let Some(t) = f(idx, &ball) {
                return Ok(Some(t));
            }
            if idx >= budget {
                return Ok(None);
            }
        }
    }
}

/// Catalog index with its dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogIndex {
    pub d: usize,
    pub l: usize,
}

/// Default number of catalog entries scanned for one child lookup.
pub const CHILD_SCAN_BUDGET: usize = 20_000;

fn node_cache() -> &'static Mutex<HashMap<Vec<u64>, PolytopeBall>> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<u64>, PolytopeBall>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Ball of `Z_eta`: `Z_(j)` is the `j`-th one-dimensional entry and
/// `Z_(eta, j)` the `j`-th entry of dimension `|eta| + 1` whose
/// `|eta|`-dimensional section has the norm of `Z_eta`.
pub fn catalog_ball(eta: &[u64]) -> Result<PolytopeBall> {
    if eta.is_empty() || eta.contains(&0) {
        return Err(Error::InvalidArgument("tree index must be a nonempty sequence of positive integers".into()));
    }
    if eta.len() > MAX_DIM {
        return Err(Error::OutOfRange(format!("tree index length {} exceeds {MAX_DIM}", eta.len())));
    }
    if let Some(b) = node_cache().lock().expect("cache lock").get(eta) {
        return Ok(b.clone());
    }
    let ball = if eta.len() == 1 {
        rational_ball(1, eta[0] as usize)?
    } else {
        let parent = catalog_ball(&eta[..eta.len() - 1])?;
        let want = eta[eta.len() - 1] as usize;
        let d = eta.len();
        let mut seen = 0usize;
        let found = scan(d, CHILD_SCAN_BUDGET, |_, ball| {
            let sec = ball.section(d - 1).ok()?;
            if sec.same_norm(&parent).ok()? {
                seen += 1;
                if seen == want {
                    return Some(ball.clone());
                }
            }
            None
        })?;
        found.ok_or(Error::BudgetExceeded { budget: CHILD_SCAN_BUDGET as u64, last: CHILD_SCAN_BUDGET as u64 })?
    };
    node_cache().lock().expect("cache lock").insert(eta.to_vec(), ball.clone());
    Ok(ball)
}

/// Outcome of the bounded search for a given extension among the children
/// of a catalog node.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChildWitness {
    /// Child position `j` with `Z_(eta, j)` equal to the supplied ball.
    pub child: u64,
    /// Catalog entries scanned.
    pub scanned: usize,
    /// Total encoding size of the canonical form; the search never needs
    /// entries beyond this size.
    pub size_bound: u64,
}

/// Find the child index of `eta` whose space has the norm of `ext`.
pub fn find_child(eta: &[u64], ext: &PolytopeBall, budget: usize) -> Result<Option<ChildWitness>> {
    let parent = catalog_ball(eta)?;
    let d = eta.len() + 1;
    if ext.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: ext.dim() });
    }
    if space::polytope_monotone_witness(ext)?.is_some() {
        return Err(Error::Precondition("extension is not monotone".into()));
    }
    if !ext.section(d - 1)?.same_norm(&parent)? {
        return Err(Error::Precondition("extension does not restrict to the parent norm".into()));
    }
    let canon = PolytopeBall::new(d, ext.generators().to_vec())?;
    let bound = canon.encoding_size();
    let mut child = 0u64;
    let mut stop = false;
    let res = scan(d, budget, |idx, ball| {
        if ball.encoding_size() > bound {
            stop = true;
            return Some(None);
        }
        let sec = ball.section(d - 1).ok()?;
        if sec.same_norm(&parent).ok()? {
            child += 1;
            if *ball == canon {
                return Some(Some(ChildWitness { child, scanned: idx, size_bound: bound }));
            }
        }
        None
    })?;
    Ok(res.flatten())
}

/// Finite piece of the universal tree: nodes `eta` with `|eta| <= depth`
/// and entries `<= breadth`, leaf `eta` carrying the norm of `Z_eta`.
pub fn universal_truncation(depth: usize, breadth: u64, constants: Vec<Rat>) -> Result<crate::treespace::FiniteTree> {
    if depth == 0 || breadth == 0 {
        return Err(Error::InvalidArgument("depth and breadth must be positive".into()));
    }
    let mut count = 0u64;
    let mut level = 1u64;
    for _ in 0..depth {
        level = level.saturating_mul(breadth);
        count = count.saturating_add(level);
    }
    if count > crate::treespace::MAX_NODES as u64 {
        return Err(Error::ResourceGuard(format!("{count} nodes exceed the cap {}", crate::treespace::MAX_NODES)));
    }
    let labels: Vec<String> = (1..=breadth).map(|j| j.to_string()).collect();
    let mut nodes: Vec<Vec<u64>> = (1..=breadth).map(|j| vec![j]).collect();
    let mut frontier = nodes.clone();
    for _ in 1..depth {
        let mut next = Vec::new();
        for eta in &frontier {
            for j in 1..=breadth {
                let mut c = eta.clone();
                c.push(j);
                next.push(c);
            }
        }
        nodes.extend(next.iter().cloned());
        frontier = next;
    }
    let key = |eta: &[u64]| eta.iter().map(|j| j.to_string()).collect::<Vec<_>>().join("/");
    let mut branch_norms = std::collections::BTreeMap::new();
    for eta in &frontier {
        branch_norms.insert(key(eta), space::BasisSpace::polytope(catalog_ball(eta)?));
    }
    let nodes = nodes.iter().map(|eta| eta.iter().map(|j| j.to_string()).collect()).collect();
    crate::treespace::FiniteTree::new(labels, nodes, branch_norms, constants)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_values() {
        assert_eq!(pi(1), (1, 1));
        assert_eq!(pi(2), (1, 2));
        assert_eq!(pi(3), (2, 1));
        assert_eq!(pi(4), (1, 3));
        assert_eq!(pi(6), (3, 1));
        for i in 1..5000 {
            let (n, k) = pi(i);
            assert_eq!(pi_inverse(n, k), i);
        }
    }

    #[test]
    fn varpi_small() {
        assert_eq!(varpi(1), vec![1]);
        assert_eq!(varpi(2), vec![2]);
        assert_eq!(varpi(3), vec![1, 1]);
        assert_eq!(varpi(4), vec![3]);
        for i in 1..2000 {
            assert_eq!(varpi_inverse(&varpi(i)), i);
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(rationals_of_size(2), vec![Rat::zero(), Rat::one()]);
        assert_eq!(
            rationals_of_size(3),
            vec![Rat::int(-1), Rat::new(1, 3), Rat::new(1, 2), Rat::int(2), Rat::int(3)]
        );
        for s in 2..9 {
            for r in rationals_of_size(s) {
                assert_eq!(r.encoding_size(), s);
            }
        }
    }

    #[test]
    fn one_dimensional_head() {
        let head = catalog_prefix(1, 4).unwrap();
        assert_eq!(head[0].generators(), &[vec![Rat::one()]]);
        for b in &head {
            assert_eq!(b.generators().len(), 1);
        }
    }

    #[test]
    fn universal_truncation_shape() {
        let t = universal_truncation(2, 2, vec![Rat::one(), Rat::one()]).unwrap();
        assert_eq!(t.node_count(), 6);
        assert_eq!(t.leaves().len(), 4);
        let paths = t.node_paths();
        for p in ["1", "2", "1/1", "1/2", "2/1", "2/2"] {
            assert!(paths.iter().any(|q| q == p), "{p} missing from {paths:?}");
        }
        let zero = vec![Rat::zero(); 6];
        assert!(t.e_norm(&zero).unwrap().exact().unwrap().is_zero());
        assert!(matches!(universal_truncation(3, 4, Vec::new()), Err(Error::ResourceGuard(_))));
        assert!(universal_truncation(0, 2, Vec::new()).is_err());
    }
}
