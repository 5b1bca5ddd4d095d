//! First-passage percolation on finite windows and tori.
//!
//! Passage times are computed with a priority-queue search. Weights of
//! atomic laws whose support is a decimal grid are converted to integer ticks
//! so that ties are detected exactly; all other laws use binary64 and compare
//! sums with exact equality, which is consistent because the geodesic DAG is
//! read off the same sums the search compared.
//!
//! A window result is *certified* when every path that touches the window
//! boundary is strictly longer than `T`; the window policy in [`window`]
//! grows the window until this holds.

mod geodesic;
mod responses;
mod search;
pub mod torus;
pub mod window;

use thiserror::Error;

use crate::lattice::{ball, Adjacency, EdgeId, LatticeError, Region, Site};
use crate::weights::{WeightField, WeightsError};
use search::{dijkstra, Cost, Real, Stop};

pub use torus::{torus_passage, torus_passage_with, TorusResult};
pub use window::{averaging_radius, run_point, EngineCache, PointRun, RunDetail, WindowPolicy};

#[derive(Debug, Error)]
pub enum FppError {
    #[error("site {0} is not in the window")]
    OutsideWindow(Site),
    #[error("edge {0:?} is not in the window")]
    EdgeOutside(EdgeId),
    #[error("edge index {0} out of range")]
    EdgeIndex(usize),
    #[error("field region does not match the engine window")]
    WindowMismatch,
    #[error("expected a {expected} region")]
    RegionKind { expected: &'static str },
    #[error("weight {0} is not a finite nonnegative number")]
    BadWeight(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
}

/// Edge costs in the arithmetic lane chosen for a field.
#[derive(Debug, Clone)]
pub(crate) enum Weights {
    Ticks { scale: i64, costs: Vec<i64> },
    Real(Vec<Real>),
}

impl Weights {
    pub(crate) fn of(field: &WeightField) -> Self {
        if let Some(scale) = field.spec().integer_scale() {
            let costs: Option<Vec<i64>> = field.weights().iter().map(|&w| i64::from_f64(w, scale)).collect();
            if let Some(costs) = costs {
                return Weights::Ticks { scale, costs };
            }
        }
        Weights::Real(field.weights().iter().map(|&w| Real(w + 0.0)).collect())
    }
}

/// Run `$body` with `$c` bound to the cost slice and `$s` to the tick scale,
/// monomorphised for both lanes.
macro_rules! with_lane {
    ($w:expr, |$c:ident, $s:ident| $body:expr) => {
        match $w {
            $crate::fpp::Weights::Ticks { scale, costs } => {
                let $c: &[i64] = &costs[..];
                let $s: i64 = *scale;
                $body
            }
            $crate::fpp::Weights::Real(costs) => {
                let $c: &[$crate::fpp::search::Real] = &costs[..];
                let $s: i64 = 1;
                $body
            }
        }
    };
}
pub(crate) use with_lane;

#[derive(Debug, Clone)]
struct Dist<C> {
    t: C,
    src: Vec<C>,
    /// Absent for results computed without the backward field.
    dst: Option<Vec<C>>,
}

#[derive(Debug, Clone)]
enum Fields {
    Ticks { scale: i64, dist: Dist<i64> },
    Real(Dist<Real>),
}

trait Lane: Cost {
    fn pack(dist: Dist<Self>, scale: i64) -> Fields;
    fn unpack(fields: &Fields) -> Option<&Dist<Self>>;
}

impl Lane for i64 {
    fn pack(dist: Dist<Self>, scale: i64) -> Fields {
        Fields::Ticks { scale, dist }
    }

    fn unpack(fields: &Fields) -> Option<&Dist<Self>> {
        match fields {
            Fields::Ticks { dist, .. } => Some(dist),
            Fields::Real(_) => None,
        }
    }
}

impl Lane for Real {
    fn pack(dist: Dist<Self>, _scale: i64) -> Fields {
        Fields::Real(dist)
    }

    fn unpack(fields: &Fields) -> Option<&Dist<Self>> {
        match fields {
            Fields::Real(dist) => Some(dist),
            Fields::Ticks { .. } => None,
        }
    }
}

/// Point-to-point passage time with its geodesic structure.
///
/// Distances larger than `t` are reported as `+inf`: the searches stop once
/// everything within `t` of their root is settled.
#[derive(Debug, Clone)]
pub struct PassageResult {
    pub t: f64,
    pub src: Site,
    pub dst: Site,
    pub window: Region,
    /// Edge indices (in `window`) lying on some geodesic, sorted.
    pub geodesic_dag: Vec<usize>,
    /// Edge indices lying on every geodesic, sorted.
    pub g_intersection: Vec<usize>,
    /// One geodesic, `src` first.
    pub sample_path: Vec<Site>,
    /// Edge indices along `sample_path`.
    pub path_edges: Vec<usize>,
    /// Whether every boundary-touching path is strictly longer than `t`.
    pub certified: bool,
    /// Number of intersection decisions made by the exact fallback.
    pub fallback_checks: usize,
    /// Lower bound on the cost of any path touching the window boundary.
    boundary_bound: f64,
    fields: Fields,
}

impl PassageResult {
    fn with_dist<R>(&self, f: impl FnOnce(&dyn Fn(usize) -> f64, &dyn Fn(usize) -> f64) -> R) -> R {
        match &self.fields {
            Fields::Ticks { scale, dist } => {
                let s = *scale;
                f(&|u| dist.src[u].to_f64(s), &|u| {
                    dist.dst.as_ref().map_or(f64::NAN, |d| d[u].to_f64(s))
                })
            }
            Fields::Real(dist) => f(&|u| dist.src[u].0, &|u| dist.dst.as_ref().map_or(f64::NAN, |d| d[u].0)),
        }
    }

    /// Distance from `src` to the site with window index `u`.
    pub fn d_src(&self, u: usize) -> f64 {
        self.with_dist(|s, _| s(u))
    }

    /// Distance from the site with window index `u` to `dst`; NaN if the
    /// result was computed without the backward field.
    pub fn d_dst(&self, u: usize) -> f64 {
        self.with_dist(|_, d| d(u))
    }

    pub fn d_src_field(&self) -> Vec<f64> {
        (0..self.window.site_count()).map(|u| self.d_src(u)).collect()
    }

    pub fn d_dst_field(&self) -> Vec<f64> {
        (0..self.window.site_count()).map(|u| self.d_dst(u)).collect()
    }

    pub fn in_dag(&self, edge: usize) -> bool {
        self.geodesic_dag.binary_search(&edge).is_ok()
    }

    pub fn in_intersection(&self, edge: usize) -> bool {
        self.g_intersection.binary_search(&edge).is_ok()
    }

    pub fn dag_edge_ids(&self) -> Vec<EdgeId> {
        self.geodesic_dag.iter().map(|&e| self.window.edge_at(e)).collect()
    }

    /// Lower bound on the cost of any path leaving the window.
    pub fn boundary_bound(&self) -> f64 {
        self.boundary_bound
    }

    pub fn has_dst_field(&self) -> bool {
        match &self.fields {
            Fields::Ticks { dist, .. } => dist.dst.is_some(),
            Fields::Real(dist) => dist.dst.is_some(),
        }
    }

    /// Whether the arithmetic ran in integer ticks.
    pub fn is_exact_arithmetic(&self) -> bool {
        matches!(self.fields, Fields::Ticks { .. })
    }
}

/// `T` as a function of one edge weight `s`, all others fixed:
/// `T(s) = min(t_without, through + s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeResponse {
    /// Cheapest path through the edge, not counting the edge itself.
    pub through: f64,
    /// Passage time with the edge deleted.
    pub t_without: f64,
    /// Whether `t_without` is certified by the window.
    pub certified: bool,
}

impl EdgeResponse {
    pub fn at(&self, s: f64) -> f64 {
        self.t_without.min(self.through + s)
    }

    /// The criticality `D = (t_without - through)_+`.
    pub fn criticality(&self) -> f64 {
        (self.t_without - self.through).max(0.0)
    }
}

/// Criticality of an edge: the largest weight at which it still lies on a
/// geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityValue {
    pub d: f64,
    pub certified: bool,
}

/// Search state shared by every field on one region.
#[derive(Debug)]
pub struct Engine {
    region: Region,
    adj: Adjacency,
    boundary: Vec<bool>,
}

struct Solved<C> {
    dist: Dist<C>,
    geo: geodesic::Geodesics,
    bound: C,
    certified: bool,
}

impl Engine {
    pub fn new(region: &Region) -> Self {
        let boundary = (0..region.site_count())
            .map(|u| region.is_boundary(&region.site_at(u)))
            .collect();
        Engine {
            region: *region,
            adj: Adjacency::of_region(region),
            boundary,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    fn check_field(&self, field: &WeightField) -> Result<(), FppError> {
        if field.region() != &self.region {
            return Err(FppError::WindowMismatch);
        }
        Ok(())
    }

    fn index(&self, site: &Site) -> Result<usize, FppError> {
        self.region.site_index(site).ok_or(FppError::OutsideWindow(*site))
    }

    fn min_boundary<C: Cost>(&self, tree: &search::Tree<C>) -> C {
        tree.order
            .iter()
            .map(|&u| u as usize)
            .find(|&u| self.boundary[u])
            .map(|u| tree.dist[u])
            .unwrap_or(C::INF)
    }

    /// A path touching the boundary first at `b1` and last at `b2` costs at
    /// least `d_src(b1) + d_dst(b2)`, so the window is certified when the
    /// smallest boundary distances from both ends sum to more than `T`.
    /// Without the full backward field, a probe from `dst` out to radius
    /// `T - min d_src(b)` decides the same question.
    fn solve<C: Cost>(&self, cost: &[C], s: usize, t: usize, moduli: (u64, u64), full: bool) -> Solved<C> {
        let st = dijkstra(&self.adj, cost, None, s, Stop::through(t));
        let tt = st.dist[t];
        let bnd_src = self.min_boundary(&st);
        let (dst, bound, certified) = if full {
            let dt = dijkstra(&self.adj, cost, None, t, Stop::bound(tt));
            let bound = bnd_src.plus(self.min_boundary(&dt));
            (Some(dt.dist), bound, bound > tt)
        } else if bnd_src > tt {
            (None, bnd_src, true)
        } else {
            let probe = dijkstra(&self.adj, cost, None, t, Stop::bound(tt.minus(bnd_src)));
            let b = self.min_boundary(&probe);
            if b.is_inf() {
                (None, tt, true)
            } else {
                (None, bnd_src.plus(b), false)
            }
        };
        let geo = geodesic::analyze(&self.adj, cost, None, &st, s, t, |u| self.region.site_at(u), moduli);
        Solved {
            dist: Dist {
                t: tt,
                src: st.dist,
                dst,
            },
            geo,
            bound,
            certified,
        }
    }

    /// Passage time from `src` to `dst` within the window, with both
    /// distance fields.
    pub fn passage(&self, field: &WeightField, src: &Site, dst: &Site) -> Result<PassageResult, FppError> {
        self.passage_with(field, src, dst, true)
    }

    /// As [`Engine::passage`] but without the backward distance field.
    /// Edge updates on such a result recompute it first.
    pub fn passage_light(&self, field: &WeightField, src: &Site, dst: &Site) -> Result<PassageResult, FppError> {
        self.passage_with(field, src, dst, false)
    }

    fn passage_with(&self, field: &WeightField, src: &Site, dst: &Site, full: bool) -> Result<PassageResult, FppError> {
        self.check_field(field)?;
        let s = self.index(src)?;
        let t = self.index(dst)?;
        let moduli = geodesic::modulus_pair(field.seed() ^ (s as u64).rotate_left(32) ^ t as u64);
        let weights = Weights::of(field);
        Ok(with_lane!(&weights, |cost, scale| self.finish(
            self.solve(cost, s, t, moduli, full),
            scale,
            *src,
            *dst
        )))
    }

    /// Whether every path from `s` to `t` through the boundary costs more
    /// than `tt`.
    fn boundary_clear<C: Cost>(&self, cost: &[C], s: usize, t: usize, tt: C) -> bool {
        let st = dijkstra(&self.adj, cost, None, s, Stop::bound(tt));
        let bnd_src = self.min_boundary(&st);
        if bnd_src > tt {
            return true;
        }
        let probe = dijkstra(&self.adj, cost, None, t, Stop::bound(tt.minus(bnd_src)));
        self.min_boundary(&probe).is_inf()
    }

    /// Only the passage time, by a search from both ends, and whether every
    /// boundary-touching path costs at least as much.
    pub fn passage_time_only(&self, field: &WeightField, src: &Site, dst: &Site) -> Result<(f64, bool), FppError> {
        self.check_field(field)?;
        let s = self.index(src)?;
        let t = self.index(dst)?;
        let weights = Weights::of(field);
        Ok(with_lane!(&weights, |cost, scale| {
            let m = search::bidirectional(&self.adj, cost, s, t, &self.boundary);
            // the meeting only bounds the boundary distances from below
            let ok = m.marked_src.plus(m.marked_dst) >= m.t || self.boundary_clear(cost, s, t, m.t);
            (m.t.to_f64(scale), ok)
        }))
    }

    fn finish<C: Lane>(&self, solved: Solved<C>, scale: i64, src: Site, dst: Site) -> PassageResult {
        let t = solved.dist.t;
        PassageResult {
            t: t.to_f64(scale),
            src,
            dst,
            window: self.region,
            geodesic_dag: solved.geo.dag_edges,
            g_intersection: solved.geo.intersection,
            sample_path: solved.geo.path_nodes.iter().map(|&u| self.region.site_at(u)).collect(),
            path_edges: solved.geo.path_edges,
            certified: solved.certified,
            fallback_checks: solved.geo.fallback_edges,
            boundary_bound: solved.bound.to_f64(scale),
            fields: C::pack(solved.dist, scale),
        }
    }

    fn response<C: Lane>(&self, cost: &[C], dist: &Dist<C>, in_dag: bool, e: usize, s: usize, t: usize) -> (C, C) {
        if in_dag {
            let through = dist.t.minus(cost[e]);
            let tree = dijkstra(&self.adj, cost, Some(e), s, Stop::at(t));
            (through, tree.dist[t])
        } else {
            let dd = dist.dst.as_ref().expect("full result");
            let (u, v) = self.region.edge_endpoints(e);
            let a = dist.src[u].plus(dd[v]);
            let b = dist.src[v].plus(dd[u]);
            (a.min(b), dist.t)
        }
    }

    /// `T` as a function of the weight of `edge`, from a result on `field`.
    pub fn edge_response(
        &self,
        field: &WeightField,
        result: &PassageResult,
        edge: usize,
    ) -> Result<EdgeResponse, FppError> {
        self.check_field(field)?;
        if edge >= self.region.edge_count() {
            return Err(FppError::EdgeIndex(edge));
        }
        let s = self.index(&result.src)?;
        let t = self.index(&result.dst)?;
        let weights = Weights::of(field);
        let in_dag = result.in_dag(edge);
        let out = with_lane!(&weights, |cost, scale| {
            match Lane::unpack(&result.fields).filter(|d| d.dst.is_some()) {
                Some(dist) => {
                    let (through, without) = self.response(cost, dist, in_dag, edge, s, t);
                    Some((through.to_f64(scale), without.to_f64(scale)))
                }
                None => None,
            }
        });
        let (through, t_without) = match out {
            Some(v) => v,
            None => {
                let fresh = self.passage(field, &result.src, &result.dst)?;
                return self.edge_response(field, &fresh, edge);
            }
        };
        Ok(EdgeResponse {
            through,
            t_without,
            certified: t_without <= result.boundary_bound,
        })
    }

    /// Passage time after setting the weight of `edge` to `new_t`. Lowering
    /// a weight and raising a weight off the DAG are answered from the
    /// distance fields; raising a DAG edge costs one search with the edge
    /// deleted.
    pub fn single_edge_update(
        &self,
        field: &WeightField,
        result: &PassageResult,
        edge: usize,
        new_t: f64,
    ) -> Result<f64, FppError> {
        self.check_field(field)?;
        if edge >= self.region.edge_count() {
            return Err(FppError::EdgeIndex(edge));
        }
        if !(new_t.is_finite() && new_t >= 0.0) {
            return Err(FppError::BadWeight(new_t));
        }
        let s = self.index(&result.src)?;
        let t = self.index(&result.dst)?;
        let weights = Weights::of(field);
        let in_dag = result.in_dag(edge);
        let fast = with_lane!(&weights, |cost, scale| {
            match (
                Lane::unpack(&result.fields).filter(|d| d.dst.is_some()),
                Cost::from_f64(new_t, scale),
            ) {
                (Some(dist), Some(new)) => Some(self.update(cost, dist, in_dag, edge, new, s, t).to_f64(scale)),
                _ => None,
            }
        });
        match fast {
            Some(v) => Ok(v),
            None => {
                let changed = field.with_weight(edge, new_t)?;
                Ok(self.passage(&changed, &result.src, &result.dst)?.t)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn update<C: Lane>(&self, cost: &[C], dist: &Dist<C>, in_dag: bool, e: usize, new: C, s: usize, t: usize) -> C {
        let old = cost[e];
        if new <= old {
            let dd = dist.dst.as_ref().expect("full result");
            let (u, v) = self.region.edge_endpoints(e);
            let a = dist.src[u].plus(new).plus(dd[v]);
            let b = dist.src[v].plus(new).plus(dd[u]);
            dist.t.min(a).min(b)
        } else if !in_dag {
            dist.t
        } else {
            let tree = dijkstra(&self.adj, cost, Some(e), s, Stop::at(t));
            dist.t.plus(new.minus(old)).min(tree.dist[t])
        }
    }

    pub fn criticality(
        &self,
        field: &WeightField,
        result: &PassageResult,
        edge: usize,
    ) -> Result<CriticalityValue, FppError> {
        let r = self.edge_response(field, result, edge)?;
        Ok(CriticalityValue {
            d: r.criticality(),
            certified: r.certified,
        })
    }

    /// Average of `T(z, z + n e_1)` over `z` in the L1 ball of radius `m`.
    pub fn averaged(&self, field: &WeightField, n: i64, m: i64) -> Result<Averaged, FppError> {
        let dim = self.region.dim();
        let mut components = Vec::new();
        let mut certified = true;
        for z in ball(m, dim) {
            let (t, ok) = self.passage_time_only(field, &z, &z.offset(0, n))?;
            certified &= ok;
            components.push((z, t));
        }
        let f_n = crate::numeric::compensated_sum(components.iter().map(|c| c.1)) / components.len() as f64;
        Ok(Averaged {
            f_n,
            m,
            components,
            certified,
        })
    }
}

/// The averaged passage time `F_n` and its terms.
#[derive(Debug, Clone)]
pub struct Averaged {
    pub f_n: f64,
    pub m: i64,
    pub components: Vec<(Site, f64)>,
    pub certified: bool,
}

/// Passage time on the field's own region.
pub fn passage_time(field: &WeightField, src: &Site, dst: &Site) -> Result<PassageResult, FppError> {
    if field.region().is_torus() {
        return Err(FppError::RegionKind { expected: "box" });
    }
    Engine::new(field.region()).passage(field, src, dst)
}

/// Edges on every geodesic of a result.
pub fn geodesic_intersection(result: &PassageResult) -> Vec<EdgeId> {
    result
        .g_intersection
        .iter()
        .map(|&e| result.window.edge_at(e))
        .collect()
}

pub fn edge_criticality(
    field: &WeightField,
    edge: &EdgeId,
    src: &Site,
    dst: &Site,
) -> Result<CriticalityValue, FppError> {
    let engine = Engine::new(field.region());
    let e = field.region().edge_index(edge).ok_or(FppError::EdgeOutside(*edge))?;
    let result = engine.passage(field, src, dst)?;
    engine.criticality(field, &result, e)
}

pub fn single_edge_update(
    field: &WeightField,
    result: &PassageResult,
    edge: &EdgeId,
    new_t: f64,
) -> Result<f64, FppError> {
    let e = field.region().edge_index(edge).ok_or(FppError::EdgeOutside(*edge))?;
    Engine::new(field.region()).single_edge_update(field, result, e, new_t)
}

/// `F_n` from the origin, with `m` the smallest integer such that `m^4 >= n`.
pub fn averaged_passage(field: &WeightField, n: i64) -> Result<Averaged, FppError> {
    Engine::new(field.region()).averaged(field, n, averaging_radius(n))
}
