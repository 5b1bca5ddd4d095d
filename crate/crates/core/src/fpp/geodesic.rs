//! Geodesic structure from a source-rooted search tree.
//!
//! An arc `u -> v` through edge `e` is *tight* when `d(u) + t_e = d(v)`,
//! using exactly the sum the search compared when it relaxed `e`. Every
//! geodesic consists of tight arcs, and every tight walk from the source to
//! the destination has cost `T`, so the set of edges on some geodesic is the
//! set of tight arcs from which the destination can be reached.
//!
//! An edge lies on every geodesic iff removing it disconnects the
//! destination in the tight graph. With positive weights the tight graph is
//! acyclic and this is decided by path counting: `e = (u -> v)` is on every
//! path iff `N(src -> u) * N(v -> dst) = N(src -> dst)`. Counts are kept
//! modulo two 61-bit primes; if the two residues disagree about an edge, or
//! the tight graph has zero-weight cycles, the edge is decided by an exact
//! reachability test instead.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::search::{Cost, Tree};
use crate::lattice::{Adjacency, Site};
use crate::rng::mix64;

/// 61-bit primes, largest first. Pairs are drawn from this table.
pub(crate) const PRIMES_61: [u64; 8] = [
    2_305_843_009_213_693_951,
    2_305_843_009_213_693_921,
    2_305_843_009_213_693_907,
    2_305_843_009_213_693_723,
    2_305_843_009_213_693_693,
    2_305_843_009_213_693_669,
    2_305_843_009_213_693_613,
    2_305_843_009_213_693_561,
];

/// Two distinct moduli chosen by a seed.
pub(crate) fn modulus_pair(seed: u64) -> (u64, u64) {
    let h = mix64(seed, 0x6765_6f64);
    let i = (h % 8) as usize;
    let j = (i + 1 + ((h >> 8) % 7) as usize) % 8;
    (PRIMES_61[i], PRIMES_61[j])
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    from: u32,
    to: u32,
    edge: u32,
}

/// Output of [`analyze`].
#[derive(Debug, Clone, Default)]
pub(crate) struct Geodesics {
    /// Edge ids on some geodesic, sorted.
    pub dag_edges: Vec<usize>,
    /// Edge ids on every geodesic, sorted.
    pub intersection: Vec<usize>,
    /// Node sequence of the extracted geodesic, source first.
    pub path_nodes: Vec<usize>,
    /// Edge ids along the extracted geodesic.
    pub path_edges: Vec<usize>,
    /// Number of edges decided by the exact fallback.
    pub fallback_edges: usize,
}

/// Analyse the tight graph of `tree` between `src` and `dst`. `tree` must
/// have settled every node at distance `<= d(dst)`. `key` orders nodes for
/// the deterministic choice of predecessor on the extracted path.
pub(crate) fn analyze<C: Cost, K: Fn(usize) -> Site>(
    adj: &Adjacency,
    cost: &[C],
    deleted: Option<usize>,
    tree: &Tree<C>,
    src: usize,
    dst: usize,
    key: K,
    moduli: (u64, u64),
) -> Geodesics {
    if !tree.settled(dst) {
        return Geodesics::default();
    }
    // Backward sweep from dst over tight arcs.
    let mut arcs: Vec<Arc> = Vec::new();
    let mut incoming: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut reached: BTreeSet<usize> = BTreeSet::new();
    let mut queue = VecDeque::new();
    reached.insert(dst);
    queue.push_back(dst);
    while let Some(v) = queue.pop_front() {
        let start = arcs.len();
        let dv = tree.dist[v];
        for (u, e) in adj.neighbors(v) {
            if Some(e) == deleted || !tree.settled(u) {
                continue;
            }
            if tree.dist[u].plus(cost[e]) == dv {
                arcs.push(Arc {
                    from: u as u32,
                    to: v as u32,
                    edge: e as u32,
                });
                if reached.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        incoming.insert(v, (start, arcs.len()));
    }

    let dag_edges: Vec<usize> = arcs
        .iter()
        .map(|a| a.edge as usize)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let (path_nodes, path_edges) = extract_path(tree, &arcs, &incoming, src, dst, &key);

    let cyclic = arcs.iter().any(|a| cost[a.edge as usize] == C::ZERO);
    let (intersection, fallback_edges) = if cyclic {
        let candidates: BTreeSet<usize> = path_edges.iter().copied().collect();
        let inter: Vec<usize> = candidates
            .into_iter()
            .filter(|&e| !reachable_without(&arcs, src, dst, e))
            .collect();
        let n = path_edges.len();
        (inter, n)
    } else {
        counted_intersection(tree, &arcs, &incoming, &reached, src, dst, moduli)
    };

    Geodesics {
        dag_edges,
        intersection,
        path_nodes,
        path_edges,
        fallback_edges,
    }
}

/// Walk back from `dst`, always taking the tight predecessor settled earlier
/// with the smallest key.
fn extract_path<C: Cost, K: Fn(usize) -> Site>(
    tree: &Tree<C>,
    arcs: &[Arc],
    incoming: &BTreeMap<usize, (usize, usize)>,
    src: usize,
    dst: usize,
    key: &K,
) -> (Vec<usize>, Vec<usize>) {
    let mut nodes = vec![dst];
    let mut edges = Vec::new();
    let mut v = dst;
    while v != src {
        let (s, e) = incoming[&v];
        let best = arcs[s..e]
            .iter()
            .filter(|a| tree.rank[a.from as usize] < tree.rank[v])
            .min_by_key(|a| key(a.from as usize))
            .expect("every settled node but the source has an earlier tight predecessor");
        edges.push(best.edge as usize);
        v = best.from as usize;
        nodes.push(v);
    }
    nodes.reverse();
    edges.reverse();
    (nodes, edges)
}

fn reachable_without(arcs: &[Arc], src: usize, dst: usize, skip_edge: usize) -> bool {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in arcs {
        if a.edge as usize != skip_edge {
            out.entry(a.from as usize).or_default().push(a.to as usize);
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![src];
    seen.insert(src);
    while let Some(u) = stack.pop() {
        if u == dst {
            return true;
        }
        if let Some(next) = out.get(&u) {
            for &v in next {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
    }
    false
}

fn counted_intersection<C: Cost>(
    tree: &Tree<C>,
    arcs: &[Arc],
    incoming: &BTreeMap<usize, (usize, usize)>,
    reached: &BTreeSet<usize>,
    src: usize,
    dst: usize,
    (p1, p2): (u64, u64),
) -> (Vec<usize>, usize) {
    let mut nodes: Vec<usize> = reached.iter().copied().collect();
    nodes.sort_by_key(|&u| tree.rank[u]);
    let mut from_src: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    let mut to_dst: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for &v in &nodes {
        let c = if v == src {
            (1, 1)
        } else {
            let (s, e) = incoming[&v];
            arcs[s..e].iter().fold((0, 0), |acc, a| {
                let c = from_src.get(&(a.from as usize)).copied().unwrap_or((0, 0));
                (addmod(acc.0, c.0, p1), addmod(acc.1, c.1, p2))
            })
        };
        from_src.insert(v, c);
    }
    to_dst.insert(dst, (1, 1));
    for &v in nodes.iter().rev() {
        let cv = to_dst.get(&v).copied().unwrap_or((0, 0));
        let (s, e) = incoming[&v];
        for a in &arcs[s..e] {
            let entry = to_dst.entry(a.from as usize).or_insert((0, 0));
            *entry = (addmod(entry.0, cv.0, p1), addmod(entry.1, cv.1, p2));
        }
    }
    let total = from_src[&dst];
    let mut through: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for a in arcs {
        let s = from_src[&(a.from as usize)];
        let t = to_dst.get(&(a.to as usize)).copied().unwrap_or((0, 0));
        let entry = through.entry(a.edge as usize).or_insert((0, 0));
        *entry = (
            addmod(entry.0, mulmod(s.0, t.0, p1), p1),
            addmod(entry.1, mulmod(s.1, t.1, p2), p2),
        );
    }
    let mut inter = Vec::new();
    let mut fallback = 0;
    for (e, (c1, c2)) in through {
        match (c1 == total.0, c2 == total.1) {
            (true, true) => inter.push(e),
            (false, false) => {}
            _ => {
                fallback += 1;
                if !reachable_without(arcs, src, dst, e) {
                    inter.push(e);
                }
            }
        }
    }
    (inter, fallback)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_pairs_are_distinct() {
        for seed in 0..200 {
            let (a, b) = modulus_pair(seed);
            assert_ne!(a, b);
        }
    }

    #[test]
    fn mod_arithmetic() {
        let p = PRIMES_61[0];
        assert_eq!(mulmod(p - 1, p - 1, p), 1);
        assert_eq!(addmod(p - 1, 2, p), 1);
    }
}
