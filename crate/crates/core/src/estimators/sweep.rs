//! The replica sweep.
//!
//! Replica `r` at size `n` uses the seed `replica_seed(seed, n, r)` and
//! nothing else, so records do not depend on scheduling. Results are
//! collected in `(n, replica)` order.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;

use super::efron_stein::{replica_es_sum, EsMode, ES_COUNTER};
use super::geometry::{l1_diameter, transverse_deviation, window_counts};
use super::records::{FppRecord, LppRecord, Records, TorusRecord, WINDOW_RADII};
use super::EstimatorError;
use crate::fpp::{run_point, torus_passage_with, EngineCache, RunDetail, WindowPolicy};
use crate::lattice::Region;
use crate::lpp::sample_last_passage_time_with_depth;
use crate::rng::{replica_seed, stream};
use crate::weights::{log_cdf_weight, DistributionSpec, WeightField, DEFAULT_DYADIC_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// `T(0, n e_1)` on `Z^d`, realised in a growing box.
    FppPoint,
    /// Minimal loop winding once around `T_n^d` in direction `e_1`.
    FppTorus,
    /// Directed last passage on `{0..n}^2`.
    Lpp,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::FppPoint => "fpp-point",
            Model::FppTorus => "fpp-torus",
            Model::Lpp => "lpp",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "fpp-point" | "fpp" => Ok(Model::FppPoint),
            "fpp-torus" | "torus" => Ok(Model::FppTorus),
            "lpp" => Ok(Model::Lpp),
            other => Err(format!(
                "unknown model {other:?} (expected fpp-point, fpp-torus or lpp)"
            )),
        }
    }
}

/// Optional per-replica statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Statistics {
    /// Averaged passage time `F_n` (point model).
    pub f_n: bool,
    /// Per-field Efron-Stein statistic (point model).
    pub efron_stein: bool,
    /// Draws per edge when the law is not atomic.
    pub es_resamples: u32,
    /// Geodesic window counts (point model).
    pub window_counts: bool,
}

impl Default for Statistics {
    fn default() -> Self {
        Statistics {
            f_n: false,
            efron_stein: false,
            es_resamples: 4,
            window_counts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub model: Model,
    pub dim: usize,
    pub n_list: Vec<i64>,
    pub spec: DistributionSpec,
    pub replicas: u64,
    pub seed: u64,
    pub stats: Statistics,
    pub window: WindowPolicy,
    /// Bootstrap resamples used by summaries of this sweep.
    pub bootstrap: usize,
    pub dyadic_bits: u32,
}

impl SweepConfig {
    /// A point-model sweep with default statistics and window policy.
    pub fn new(model: Model, dim: usize, n_list: Vec<i64>, spec: DistributionSpec, replicas: u64, seed: u64) -> Self {
        SweepConfig {
            model,
            dim,
            n_list,
            spec,
            replicas,
            seed,
            stats: Statistics::default(),
            window: WindowPolicy::default(),
            bootstrap: super::bootstrap::DEFAULT_RESAMPLES,
            dyadic_bits: DEFAULT_DYADIC_BITS,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |msg: String| Err(EstimatorError::Config(msg));
        if self.replicas < 2 {
            return bad(format!("replicas = {} (need at least 2)", self.replicas));
        }
        if self.n_list.is_empty() {
            return bad("n list is empty".into());
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n list must be strictly increasing".into());
        }
        let min_n = if self.model == Model::FppTorus { 2 } else { 1 };
        if self.n_list[0] < min_n {
            return bad(format!("n = {} is below the minimum {min_n}", self.n_list[0]));
        }
        if !(1..=64).contains(&self.dyadic_bits) {
            return bad(format!("dyadic depth {} outside 1..=64", self.dyadic_bits));
        }
        if !(self.window.kappa.is_finite() && self.window.kappa >= 0.0) {
            return bad(format!("kappa = {} must be a nonnegative number", self.window.kappa));
        }
        match self.model {
            Model::Lpp => {
                if self.dim != 2 {
                    return bad(format!("last passage is planar, got d = {}", self.dim));
                }
            }
            Model::FppPoint | Model::FppTorus => {
                if !(crate::lattice::MIN_DIM..=crate::lattice::MAX_DIM).contains(&self.dim) {
                    return bad(format!(
                        "d = {} outside {}..={}",
                        self.dim,
                        crate::lattice::MIN_DIM,
                        crate::lattice::MAX_DIM
                    ));
                }
                self.spec.validate_for_fpp(self.dim)?;
            }
        }
        Ok(())
    }
}

/// Run every replica at every `n`. `threads = None` uses the global pool.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Records, EstimatorError> {
    cfg.validate()?;
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| EstimatorError::Config(format!("thread pool: {e}")))?
            .install(|| sweep_all(cfg)),
        None => sweep_all(cfg),
    }
}

fn sweep_all(cfg: &SweepConfig) -> Result<Records, EstimatorError> {
    let ids = |n: i64| (0..cfg.replicas).map(move |r| (n, r));
    let all: Vec<(i64, u64)> = cfg.n_list.iter().flat_map(|&n| ids(n)).collect();
    match cfg.model {
        Model::FppPoint => {
            let cache = EngineCache::new();
            let es_mode = EsMode::for_spec(&cfg.spec, cfg.stats.es_resamples);
            let out = all
                .par_iter()
                .map(|&(n, r)| fpp_replica(cfg, &cache, &es_mode, n, r))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Records::Fpp(out))
        }
        Model::FppTorus => {
            let out = all
                .par_iter()
                .map(|&(n, r)| torus_replica(cfg, n, r))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Records::Torus(out))
        }
        Model::Lpp => {
            let out = all
                .par_iter()
                .map(|&(n, r)| {
                    let seed = replica_seed(cfg.seed, n as u64, r);
                    let t = sample_last_passage_time_with_depth(&cfg.spec, n as usize, seed, cfg.dyadic_bits)?;
                    Ok(LppRecord { n, replica: r, t })
                })
                .collect::<Result<Vec<_>, EstimatorError>>()?;
            Ok(Records::Lpp(out))
        }
    }
}

fn fpp_replica(
    cfg: &SweepConfig,
    cache: &EngineCache,
    es_mode: &EsMode,
    n: i64,
    r: u64,
) -> Result<FppRecord, EstimatorError> {
    let seed = replica_seed(cfg.seed, n as u64, r);
    let detail = RunDetail {
        average: cfg.stats.f_n,
        full_fields: cfg.stats.efron_stein,
        dyadic_bits: cfg.dyadic_bits,
    };
    let run = run_point(&cfg.spec, seed, cfg.dim, n, &cfg.window, detail, cache)?;
    let res = &run.result;
    let y_n = res
        .g_intersection
        .iter()
        .map(|&e| log_cdf_weight(&cfg.spec, run.field.weight(e)))
        .sum::<Result<f64, _>>()?;
    let es_sum = if cfg.stats.efron_stein {
        let responses = run.engine.edge_responses(&run.field, res)?;
        let mut rng = stream(seed, ES_COUNTER);
        Some(replica_es_sum(
            &cfg.spec,
            &responses,
            res.t,
            es_mode,
            &mut rng as &mut dyn RngCore,
        ))
    } else {
        None
    };
    let window_counts = cfg
        .stats
        .window_counts
        .then(|| window_counts(&res.sample_path, &WINDOW_RADII))
        .map(|w| [w[0], w[1], w[2]]);
    Ok(FppRecord {
        n,
        replica: r,
        t: res.t,
        f_n: run.averaged.as_ref().map(|a| a.f_n),
        g_dag_size: res.geodesic_dag.len(),
        g_int_size: res.g_intersection.len(),
        geo_len: res.path_edges.len(),
        geo_diam: l1_diameter(&res.sample_path),
        transverse_dev: transverse_deviation(&res.sample_path),
        y_n,
        window_grows: run.grows,
        window_counts,
        es_sum,
        overflow: run.overflow,
    })
}

fn torus_replica(cfg: &SweepConfig, n: i64, r: u64) -> Result<TorusRecord, EstimatorError> {
    let seed = replica_seed(cfg.seed, n as u64, r);
    let region = Region::torus(cfg.dim, n).map_err(crate::fpp::FppError::from)?;
    let field = WeightField::sample_with_depth(&cfg.spec, &region, seed, cfg.dyadic_bits)?;
    let res = torus_passage_with(&field, 0, cfg.window.max_grows)?;
    Ok(TorusRecord {
        n,
        replica: r,
        t: res.t,
        g_dag_size: res.geodesic_dag.len(),
        g_int_size: res.g_intersection.len(),
        geo_len: res.sample_loop.len().saturating_sub(1),
        window_grows: res.grows,
        overflow: !res.certified,
        g_members: res.g_intersection,
    })
}
