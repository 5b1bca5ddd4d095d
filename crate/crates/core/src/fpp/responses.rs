//! Responses of `T` to every edge weight at once.
//!
//! Off the geodesic DAG the distance fields answer directly. An edge of the
//! DAG that some geodesic avoids has `t_without = T`. The remaining edges
//! lie on the sample path `P = p_0 .. p_L`, and their replacement times come
//! from one source tree and one target tree that both contain `P`: label a
//! node by the last path vertex on its source-tree branch and by the first
//! path vertex on its target-tree branch. When `e_i = (p_i, p_{i+1})` has
//! positive weight, every node has source label `<= i` or target label
//! `>= i + 1`, so the best path avoiding `e_i` crosses from the first kind
//! to the second along a single edge `(u, v)` and costs
//! `d_src(u) + t_uv + d_dst(v)`. Each edge thus covers a range of path
//! indices; ranges are painted in increasing cost order.

use super::search::{dijkstra, Cost, Stop, Tree};
use super::{with_lane, EdgeResponse, Engine, FppError, PassageResult, Weights};
use crate::lattice::{EdgeId, Site};
use crate::weights::WeightField;

const UNLABELLED: u32 = u32::MAX;

impl Engine {
    /// `(edge, response)` for every edge whose weight can change `T`,
    /// sorted by edge index. Edges not listed have `T(s) = T` for all `s`.
    pub fn edge_responses(
        &self,
        field: &WeightField,
        result: &PassageResult,
    ) -> Result<Vec<(usize, EdgeResponse)>, FppError> {
        self.check_field(field)?;
        let s = self.index(&result.src)?;
        let t = self.index(&result.dst)?;
        let path: Vec<usize> = result
            .sample_path
            .iter()
            .map(|site| self.index(site))
            .collect::<Result<_, _>>()?;
        let weights = Weights::of(field);
        Ok(with_lane!(&weights, |cost, scale| {
            self.responses_in(cost, s, t, &path, result)
                .into_iter()
                .map(|(e, through, without, certified)| {
                    (
                        e,
                        EdgeResponse {
                            through: through.to_f64(scale),
                            t_without: without.to_f64(scale),
                            certified,
                        },
                    )
                })
                .collect()
        }))
    }

    fn edge_between(&self, a: &Site, b: &Site) -> Option<usize> {
        let (lo, hi) = if a.coords() <= b.coords() { (a, b) } else { (b, a) };
        let axis = (0..lo.dim()).find(|&k| lo.coord(k) != hi.coord(k))?;
        self.region.edge_index(&EdgeId::new(*lo, axis))
    }

    /// Cheapest detour around `e` along the sides of a unit square.
    fn square_detour<C: Cost>(&self, cost: &[C], e: usize) -> C {
        let id = self.region.edge_at(e);
        let (a, b) = (id.base, id.head());
        let mut best = C::INF;
        for j in (0..a.dim()).filter(|&j| j != id.axis) {
            for delta in [-1, 1] {
                let (a2, b2) = (a.offset(j, delta), b.offset(j, delta));
                if !(self.region.contains(&a2) && self.region.contains(&b2)) {
                    continue;
                }
                let sides = [
                    self.edge_between(&a, &a2),
                    self.edge_between(&a2, &b2),
                    self.edge_between(&b2, &b),
                ];
                if let [Some(x), Some(y), Some(z)] = sides {
                    best = best.min(cost[x].plus(cost[y]).plus(cost[z]));
                }
            }
        }
        best
    }

    /// Path index inherited along tree branches; path vertices carry their own.
    fn labels<C: Cost>(&self, cost: &[C], tree: &Tree<C>, path: &[usize]) -> Vec<u32> {
        let mut label = vec![UNLABELLED; tree.dist.len()];
        for (i, &p) in path.iter().enumerate() {
            label[p] = i as u32;
        }
        for &u in &tree.order {
            let u = u as usize;
            if label[u] != UNLABELLED {
                continue;
            }
            let parent = self.adj.neighbors(u).find(|&(v, e)| {
                tree.settled(v) && tree.rank[v] < tree.rank[u] && tree.dist[v].plus(cost[e]) == tree.dist[u]
            });
            if let Some((v, _)) = parent {
                label[u] = label[v];
            }
        }
        label
    }

    fn responses_in<C: Cost>(
        &self,
        cost: &[C],
        s: usize,
        t: usize,
        path: &[usize],
        result: &PassageResult,
    ) -> Vec<(usize, C, C, bool)> {
        let path_edges = &result.path_edges;
        let tt = path_edges.iter().fold(C::ZERO, |acc, &e| acc.plus(cost[e]));
        let on_path: Vec<usize> = (0..path_edges.len())
            .filter(|&i| result.in_intersection(path_edges[i]))
            .collect();
        let mut radius = tt;
        for &i in &on_path {
            let e = path_edges[i];
            radius = radius.max(tt.minus(cost[e]).plus(self.square_detour(cost, e)));
        }
        let st = dijkstra(&self.adj, cost, None, s, Stop::bound(radius));
        let dt = dijkstra(&self.adj, cost, None, t, Stop::bound(radius));
        let mut sorted_path_edges = path_edges.clone();
        sorted_path_edges.sort_unstable();
        let is_path_edge = |e: usize| sorted_path_edges.binary_search(&e).is_ok();

        let or_radius = |c: C| if c.is_inf() { radius } else { c };
        let bound = or_radius(self.min_boundary(&st)).plus(or_radius(self.min_boundary(&dt)));

        // replacement times for the path edges in G
        let mut without = vec![C::INF; path_edges.len()];
        if !on_path.is_empty() {
            let tight =
                (0..path_edges.len()).all(|i| dt.dist[path[i + 1]].plus(cost[path_edges[i]]) == dt.dist[path[i]]);
            if tight {
                let ls = self.labels(cost, &st, path);
                let lt = self.labels(cost, &dt, path);
                let mut cands: Vec<(u64, u32, u32, C)> = Vec::new();
                for &u in &st.order {
                    let u = u as usize;
                    let a = ls[u];
                    if a == UNLABELLED {
                        continue;
                    }
                    for (v, e) in self.adj.neighbors(u) {
                        if is_path_edge(e) || !dt.settled(v) {
                            continue;
                        }
                        let b = lt[v];
                        if b == UNLABELLED || a >= b {
                            continue;
                        }
                        let val = st.dist[u].plus(cost[e]).plus(dt.dist[v]);
                        if val <= radius {
                            cands.push((val.key(), a, b, val));
                        }
                    }
                }
                cands.sort_unstable_by_key(|c| (c.0, c.1, c.2));
                // next unpainted index at or after i
                let mut next: Vec<usize> = (0..=path_edges.len()).collect();
                fn find(next: &mut [usize], mut i: usize) -> usize {
                    while next[i] != i {
                        next[i] = next[next[i]];
                        i = next[i];
                    }
                    i
                }
                for (_, a, b, val) in cands {
                    let mut i = find(&mut next, a as usize);
                    while i < b as usize {
                        without[i] = val;
                        next[i] = i + 1;
                        i = find(&mut next, i + 1);
                    }
                }
            }
            for &i in &on_path {
                let e = path_edges[i];
                if !tight || cost[e] == C::ZERO || without[i].is_inf() {
                    without[i] = dijkstra(&self.adj, cost, Some(e), s, Stop::at(t)).dist[t];
                }
            }
        }

        let mut out = Vec::new();
        for e in 0..self.region.edge_count() {
            if result.in_dag(e) {
                let w = match path_edges.iter().position(|&p| p == e) {
                    Some(i) if result.in_intersection(e) => without[i],
                    _ => tt,
                };
                out.push((e, tt.minus(cost[e]), w, w <= bound));
                continue;
            }
            let (u, v) = self.region.edge_endpoints(e);
            let through = st.dist[u].plus(dt.dist[v]).min(st.dist[v].plus(dt.dist[u]));
            if through < tt {
                out.push((e, through, tt, tt <= bound));
            }
        }
        out
    }
}
