//! Winding loops on the torus.
//!
//! The torus is unrolled along axis 0 into a band of layers
//! `x_0 in [c - B, c + n + B]`, the other axes staying periodic. A loop with
//! winding number one through the cut site `(c, y)` lifts to a path from
//! `(c, y)` to `(c + n, y)`, so `T` is the minimum of these point-to-point
//! times over the cut layer. Every lift of a torus edge carries the torus
//! edge index, so deleting an edge removes all of its lifts.

use std::collections::BTreeSet;

use super::geodesic::{self, Geodesics};
use super::search::{dijkstra, Cost, Stop, Tree};
use super::{with_lane, FppError, Weights};
use crate::lattice::{Adjacency, RegionKind, Site, NO_NEIGHBOR};
use crate::weights::WeightField;

/// Minimal winding loop and its geodesic structure.
#[derive(Debug, Clone)]
pub struct TorusResult {
    pub t: f64,
    pub side: i64,
    pub dim: usize,
    /// Cut coordinate `c` on axis 0.
    pub cut: i64,
    /// Torus edge indices on some minimal loop, sorted.
    pub geodesic_dag: Vec<usize>,
    /// Torus edge indices on every minimal loop, sorted.
    pub g_intersection: Vec<usize>,
    /// One minimal loop as torus sites; first and last coincide.
    pub sample_loop: Vec<Site>,
    /// Cut sites through which some minimal loop passes.
    pub optimal_cuts: Vec<Site>,
    pub certified: bool,
    pub grows: u32,
}

impl TorusResult {
    pub fn in_intersection(&self, edge: usize) -> bool {
        self.g_intersection.binary_search(&edge).is_ok()
    }
}

/// Band of layers around the cut.
struct Cover {
    side: i64,
    dim: usize,
    cut: i64,
    margin: i64,
    layer: usize,
    layers: usize,
    adj: Adjacency,
}

impl Cover {
    fn new(side: i64, dim: usize, cut: i64, margin: i64) -> Self {
        let layer = side.pow(dim as u32 - 1) as usize;
        let layers = (side + 2 * margin + 1) as usize;
        let deg = 2 * dim;
        let nodes = layer * layers;
        let mut nbr = vec![NO_NEIGHBOR; nodes * deg];
        let mut edge = vec![NO_NEIGHBOR; nodes * deg];
        let n = side as usize;
        for l in 0..layers {
            let x0 = (cut - margin + l as i64).rem_euclid(side) as usize;
            for r in 0..layer {
                let u = l * layer + r;
                let torus_site = x0 * layer + r;
                // axis 0 to the next layer
                if l + 1 < layers {
                    let v = u + layer;
                    let e = (torus_site * dim) as u32;
                    nbr[u * deg + 1] = v as u32;
                    edge[u * deg + 1] = e;
                    nbr[v * deg] = u as u32;
                    edge[v * deg] = e;
                }
                for a in 1..dim {
                    let stride = n.pow((dim - 1 - a) as u32);
                    let digit = (r / stride) % n;
                    let r2 = if digit + 1 == n { r - digit * stride } else { r + stride };
                    let v = l * layer + r2;
                    let e = (torus_site * dim + a) as u32;
                    nbr[u * deg + 2 * a + 1] = v as u32;
                    edge[u * deg + 2 * a + 1] = e;
                    nbr[v * deg + 2 * a] = u as u32;
                    edge[v * deg + 2 * a] = e;
                }
            }
        }
        Cover {
            side,
            dim,
            cut,
            margin,
            layer,
            layers,
            adj: Adjacency::from_raw(deg, nbr, edge),
        }
    }

    fn node(&self, l: usize, r: usize) -> usize {
        l * self.layer + r
    }

    fn is_boundary(&self, u: usize) -> bool {
        let l = u / self.layer;
        l == 0 || l + 1 == self.layers
    }

    /// Lifted coordinates of a cover node.
    fn site(&self, u: usize) -> Site {
        let l = u / self.layer;
        let mut r = u % self.layer;
        let mut coords = [0i64; 4];
        coords[0] = self.cut - self.margin + l as i64;
        for a in (1..self.dim).rev() {
            coords[a] = (r % self.side as usize) as i64;
            r /= self.side as usize;
        }
        Site::new(&coords[..self.dim]).expect("valid dimension")
    }

    fn torus_site(&self, u: usize) -> Site {
        let mut s = self.site(u);
        let c0 = s.coord(0).rem_euclid(self.side);
        s = s.offset(0, c0 - s.coord(0));
        s
    }

    fn min_boundary<C: Cost>(&self, tree: &Tree<C>) -> C {
        tree.order
            .iter()
            .map(|&u| u as usize)
            .find(|&u| self.is_boundary(u))
            .map(|u| tree.dist[u])
            .unwrap_or(C::INF)
    }
}

struct Solved<C> {
    t: C,
    optimal: Vec<(usize, Geodesics)>,
    certified: bool,
}

fn solve<C: Cost>(cover: &Cover, cost: &[C], moduli: (u64, u64)) -> Solved<C> {
    let src_l = cover.margin as usize;
    let dst_l = src_l + cover.side as usize;
    let mut best = C::INF;
    let mut optimal: Vec<(usize, Tree<C>)> = Vec::new();
    let mut bnd_src = Vec::with_capacity(cover.layer);
    for y in 0..cover.layer {
        let s = cover.node(src_l, y);
        let t = cover.node(dst_l, y);
        let stop = Stop {
            bound: (!best.is_inf()).then_some(best),
            target: Some(t),
            halt_at_target: false,
        };
        let tree = dijkstra(&cover.adj, cost, None, s, stop);
        bnd_src.push(cover.min_boundary(&tree));
        if tree.settled(t) {
            let ty = tree.dist[t];
            if ty < best {
                best = ty;
                optimal.clear();
            }
            if ty == best {
                optimal.push((y, tree));
            }
        }
    }
    let mut certified = true;
    for (y, &bs) in bnd_src.iter().enumerate() {
        if bs > best {
            continue;
        }
        let t = cover.node(dst_l, y);
        let back = dijkstra(&cover.adj, cost, None, t, Stop::bound(best));
        if bs.plus(cover.min_boundary(&back)) <= best {
            certified = false;
            break;
        }
    }
    let optimal = optimal
        .into_iter()
        .map(|(y, tree)| {
            let s = cover.node(src_l, y);
            let t = cover.node(dst_l, y);
            let geo = geodesic::analyze(&cover.adj, cost, None, &tree, s, t, |u| cover.site(u), moduli);
            (y, geo)
        })
        .collect();
    Solved {
        t: best,
        optimal,
        certified,
    }
}

/// Minimal winding loop with the cut at `x_0 = 0` and default growth.
pub fn torus_passage(field: &WeightField) -> Result<TorusResult, FppError> {
    torus_passage_with(field, 0, 4)
}

/// Minimal winding loop with the cut at `x_0 = cut`. The band margin starts
/// at `max(2, n)` and doubles up to `max_grows` times until certified.
pub fn torus_passage_with(field: &WeightField, cut: i64, max_grows: u32) -> Result<TorusResult, FppError> {
    let side = match field.region().kind() {
        RegionKind::Torus { side } => *side,
        RegionKind::Box { .. } => return Err(FppError::RegionKind { expected: "torus" }),
    };
    let dim = field.region().dim();
    let cut = cut.rem_euclid(side);
    let weights = Weights::of(field);
    let moduli = geodesic::modulus_pair(field.seed());
    let mut grows = 0;
    loop {
        let margin = side.max(2) << grows;
        let cover = Cover::new(side, dim, cut, margin);
        let out = with_lane!(&weights, |cost, scale| {
            let solved = solve(&cover, cost, moduli);
            (solved.t.to_f64(scale), solved.optimal, solved.certified)
        });
        let (t, optimal, certified) = out;
        if certified || grows >= max_grows {
            if !certified {
                log::warn!("torus band still uncertified after {grows} doublings");
            }
            return Ok(assemble(&cover, t, optimal, certified, grows));
        }
        grows += 1;
    }
}

fn assemble(cover: &Cover, t: f64, optimal: Vec<(usize, Geodesics)>, certified: bool, grows: u32) -> TorusResult {
    let mut dag = BTreeSet::new();
    let mut inter: Option<BTreeSet<usize>> = None;
    let mut cuts = Vec::new();
    let src_l = cover.margin as usize;
    for (y, geo) in &optimal {
        dag.extend(geo.dag_edges.iter().copied());
        let g: BTreeSet<usize> = geo.intersection.iter().copied().collect();
        inter = Some(match inter {
            None => g,
            Some(prev) => prev.intersection(&g).copied().collect(),
        });
        cuts.push(cover.torus_site(cover.node(src_l, *y)));
    }
    let sample_loop = optimal
        .first()
        .map(|(_, geo)| geo.path_nodes.iter().map(|&u| cover.torus_site(u)).collect())
        .unwrap_or_default();
    TorusResult {
        t,
        side: cover.side,
        dim: cover.dim,
        cut: cover.cut,
        geodesic_dag: dag.into_iter().collect(),
        g_intersection: inter.unwrap_or_default().into_iter().collect(),
        sample_loop,
        optimal_cuts: cuts,
        certified,
        grows,
    }
}
