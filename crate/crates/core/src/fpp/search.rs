//! Priority-queue shortest paths over an [`Adjacency`] table.
//!
//! Queue entries are `(key, node)` with an order-preserving integer key, so
//! ties are broken by node index. Stale entries are skipped on pop (lazy
//! deletion). Identical inputs give identical distance fields and settle
//! orders.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Debug;

use crate::lattice::Adjacency;

/// Path cost: exact integer ticks or binary64.
pub(crate) trait Cost: Copy + Ord + Debug + Send + Sync {
    const ZERO: Self;
    const INF: Self;
    fn plus(self, other: Self) -> Self;
    fn minus(self, other: Self) -> Self;
    fn is_inf(self) -> bool {
        self == Self::INF
    }
    /// Value in time units; `scale` is the tick size denominator.
    fn to_f64(self, scale: i64) -> f64;
    /// Exact conversion from time units, if representable.
    fn from_f64(x: f64, scale: i64) -> Option<Self>;
    /// Order-preserving integer key for nonnegative costs.
    fn key(self) -> u64;
}

/// Largest tick count accepted for a single edge.
const MAX_EDGE_TICKS: f64 = (1u64 << 40) as f64;

impl Cost for i64 {
    const ZERO: Self = 0;
    const INF: Self = i64::MAX;

    #[inline]
    fn plus(self, other: Self) -> Self {
        if self == i64::MAX || other == i64::MAX {
            i64::MAX
        } else {
            self + other
        }
    }

    #[inline]
    fn minus(self, other: Self) -> Self {
        self - other
    }

    fn to_f64(self, scale: i64) -> f64 {
        if self == i64::MAX {
            f64::INFINITY
        } else {
            self as f64 / scale as f64
        }
    }

    fn from_f64(x: f64, scale: i64) -> Option<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return None;
        }
        let v = x * scale as f64;
        let r = v.round();
        if (v - r).abs() <= 1e-9 * v.abs().max(1.0) && r <= MAX_EDGE_TICKS {
            Some(r as i64)
        } else {
            None
        }
    }

    #[inline]
    fn key(self) -> u64 {
        self as u64
    }
}

/// `f64` with a total order; never NaN in practice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Real(pub f64);

impl Eq for Real {}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Cost for Real {
    const ZERO: Self = Real(0.0);
    const INF: Self = Real(f64::INFINITY);

    #[inline]
    fn plus(self, other: Self) -> Self {
        Real(self.0 + other.0)
    }

    #[inline]
    fn minus(self, other: Self) -> Self {
        Real(self.0 - other.0)
    }

    fn to_f64(self, _scale: i64) -> f64 {
        self.0
    }

    fn from_f64(x: f64, _scale: i64) -> Option<Self> {
        (x.is_finite() && x >= 0.0).then_some(Real(x + 0.0))
    }

    /// Nonnegative binary64 values order like their bit patterns.
    #[inline]
    fn key(self) -> u64 {
        self.0.to_bits()
    }
}

pub(crate) const UNSETTLED: u32 = u32::MAX;

/// Result of one search. `dist` is exact for settled nodes and `INF`
/// elsewhere; `rank[u]` is the position of `u` in the settle order.
#[derive(Debug, Clone)]
pub(crate) struct Tree<C> {
    pub dist: Vec<C>,
    pub rank: Vec<u32>,
    pub order: Vec<u32>,
}

impl<C: Cost> Tree<C> {
    #[inline]
    pub fn settled(&self, u: usize) -> bool {
        self.rank[u] != UNSETTLED
    }
}

/// When to stop settling nodes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stop<C> {
    /// Settle only nodes at distance `<= bound`.
    pub bound: Option<C>,
    /// Once this node is settled, tighten `bound` to its distance.
    pub target: Option<usize>,
    /// Stop immediately after settling `target`.
    pub halt_at_target: bool,
}

impl<C: Cost> Stop<C> {
    #[cfg(test)]
    pub fn exhaust() -> Self {
        Stop {
            bound: None,
            target: None,
            halt_at_target: false,
        }
    }

    pub fn bound(b: C) -> Self {
        Stop {
            bound: Some(b),
            target: None,
            halt_at_target: false,
        }
    }

    /// Settle everything no farther than the target.
    pub fn through(target: usize) -> Self {
        Stop {
            bound: None,
            target: Some(target),
            halt_at_target: false,
        }
    }

    pub fn at(target: usize) -> Self {
        Stop {
            bound: None,
            target: Some(target),
            halt_at_target: true,
        }
    }
}

pub(crate) fn dijkstra<C: Cost>(
    adj: &Adjacency,
    cost: &[C],
    deleted: Option<usize>,
    source: usize,
    mut stop: Stop<C>,
) -> Tree<C> {
    let n = adj.node_count();
    let mut dist = vec![C::INF; n];
    let mut rank = vec![UNSETTLED; n];
    let mut order: Vec<u32> = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[source] = C::ZERO;
    heap.push(Reverse((C::ZERO.key(), source as u32)));
    while let Some(Reverse((k, u))) = heap.pop() {
        let u = u as usize;
        if rank[u] != UNSETTLED || k != dist[u].key() {
            continue;
        }
        let d = dist[u];
        if let Some(b) = stop.bound {
            if d > b {
                break;
            }
        }
        rank[u] = order.len() as u32;
        order.push(u as u32);
        if stop.target == Some(u) {
            if stop.halt_at_target {
                break;
            }
            stop.bound = Some(match stop.bound {
                Some(b) if b < d => b,
                _ => d,
            });
        }
        for (v, e) in adj.neighbors(u) {
            if Some(e) == deleted || rank[v] != UNSETTLED {
                continue;
            }
            let nd = d.plus(cost[e]);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd.key(), v as u32)));
            }
        }
    }
    for (u, r) in rank.iter().enumerate() {
        if *r == UNSETTLED {
            dist[u] = C::INF;
        }
    }
    Tree { dist, rank, order }
}

/// Outcome of a bidirectional search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Meeting<C> {
    pub t: C,
    /// Lower bound on `d(source, b)` over the marked nodes `b`.
    pub marked_src: C,
    /// Lower bound on `d(b, target)` over the marked nodes `b`.
    pub marked_dst: C,
}

struct Side<C> {
    dist: Vec<C>,
    /// Node and edge through which each labelled node was last improved.
    pred: Vec<(u32, u32)>,
    done: Vec<bool>,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
    marked: C,
}

impl<C: Cost> Side<C> {
    fn new(n: usize, root: usize) -> Self {
        let mut dist = vec![C::INF; n];
        dist[root] = C::ZERO;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((C::ZERO.key(), root as u32)));
        Side {
            dist,
            pred: vec![(u32::MAX, u32::MAX); n],
            done: vec![false; n],
            heap,
            marked: C::INF,
        }
    }

    /// Drop stale entries; the smallest live key, if any.
    fn top(&mut self) -> Option<(C, usize)> {
        while let Some(&Reverse((k, u))) = self.heap.peek() {
            let u = u as usize;
            if self.done[u] || k != self.dist[u].key() {
                self.heap.pop();
            } else {
                return Some((self.dist[u], u));
            }
        }
        None
    }

    /// Edges from `u` back to the root.
    fn chain(&self, mut u: usize) -> Vec<usize> {
        let mut edges = Vec::new();
        while self.pred[u].0 != u32::MAX {
            let (p, e) = self.pred[u];
            edges.push(e as usize);
            u = p as usize;
        }
        edges
    }
}

/// Point-to-point search from both ends. Also reports, for the nodes with
/// `marked[u]`, lower bounds on their distance from `source` and to
/// `target`: nodes settled on a side contribute their exact distance, the
/// rest are at least the frontier key of that side.
pub(crate) fn bidirectional<C: Cost>(
    adj: &Adjacency,
    cost: &[C],
    source: usize,
    target: usize,
    marked: &[bool],
) -> Meeting<C> {
    let n = adj.node_count();
    let mut fw = Side::new(n, source);
    let mut bw = Side::new(n, target);
    let mut best = if source == target { C::ZERO } else { C::INF };
    // (node reached from the source side, edge, node reached from the target side)
    let mut meet: Option<(usize, usize, usize)> = None;
    loop {
        let (a, b) = (fw.top(), bw.top());
        let (ka, kb) = (a.map_or(C::INF, |x| x.0), b.map_or(C::INF, |x| x.0));
        if ka.plus(kb) >= best || (a.is_none() && b.is_none()) {
            // Sum along the path from the source, as a one-sided search would.
            if let Some((x, e, y)) = meet {
                let mut edges = fw.chain(x);
                edges.reverse();
                edges.push(e);
                edges.extend(bw.chain(y));
                best = edges.iter().fold(C::ZERO, |acc, &e| acc.plus(cost[e]));
            }
            return Meeting {
                t: best,
                marked_src: fw.marked.min(ka),
                marked_dst: bw.marked.min(kb),
            };
        }
        let forward = ka <= kb;
        let (side, other, (d, u)) = if forward {
            (&mut fw, &bw, a.expect("finite key"))
        } else {
            (&mut bw, &fw, b.expect("finite key"))
        };
        side.heap.pop();
        side.done[u] = true;
        if marked[u] && d < side.marked {
            side.marked = d;
        }
        for (v, e) in adj.neighbors(u) {
            let nd = d.plus(cost[e]);
            if !other.dist[v].is_inf() {
                let through = nd.plus(other.dist[v]);
                if through < best {
                    best = through;
                    meet = Some(if forward { (u, e, v) } else { (v, e, u) });
                }
            }
            if !side.done[v] && nd < side.dist[v] {
                side.dist[v] = nd;
                side.pred[v] = (u as u32, e as u32);
                side.heap.push(Reverse((nd.key(), v as u32)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Region;

    #[test]
    fn unit_grid_distances_are_l1() {
        let region = Region::cube(2, 6).unwrap();
        let adj = Adjacency::of_region(&region);
        let cost = vec![1i64; region.edge_count()];
        let tree = dijkstra(&adj, &cost, None, 0, Stop::exhaust());
        for u in 0..region.site_count() {
            assert_eq!(tree.dist[u], region.site_at(u).l1_norm());
        }
        // settle order is nondecreasing in distance
        for w in tree.order.windows(2) {
            assert!(tree.dist[w[0] as usize] <= tree.dist[w[1] as usize]);
        }
    }

    #[test]
    fn bidirectional_agrees_with_one_sided() {
        use crate::rng::mix64;
        let region = Region::cube(2, 9).unwrap();
        let adj = Adjacency::of_region(&region);
        let marked: Vec<bool> = (0..region.site_count())
            .map(|u| region.is_boundary(&region.site_at(u)))
            .collect();
        for seed in 0..50u64 {
            let cost: Vec<i64> = (0..region.edge_count() as u64)
                .map(|e| (mix64(seed, e) % 4) as i64)
                .collect();
            let s = (mix64(seed, 1000) % 81) as usize;
            let t = (mix64(seed, 1001) % 81) as usize;
            let full = dijkstra(&adj, &cost, None, s, Stop::exhaust());
            let back = dijkstra(&adj, &cost, None, t, Stop::exhaust());
            let m = bidirectional(&adj, &cost, s, t, &marked);
            assert_eq!(m.t, full.dist[t]);
            let true_src = (0..81).filter(|&u| marked[u]).map(|u| full.dist[u]).min().unwrap();
            let true_dst = (0..81).filter(|&u| marked[u]).map(|u| back.dist[u]).min().unwrap();
            assert!(m.marked_src <= true_src);
            assert!(m.marked_dst <= true_dst);
        }
    }

    #[test]
    fn bounded_search_leaves_far_nodes_unsettled() {
        let region = Region::cube(2, 6).unwrap();
        let adj = Adjacency::of_region(&region);
        let cost = vec![1i64; region.edge_count()];
        let tree = dijkstra(&adj, &cost, None, 0, Stop::bound(3));
        for u in 0..region.site_count() {
            let l1 = region.site_at(u).l1_norm();
            if l1 <= 3 {
                assert_eq!(tree.dist[u], l1);
            } else {
                assert!(tree.dist[u].is_inf());
            }
        }
    }
}
