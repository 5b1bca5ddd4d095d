//! Finite windows standing in for `Z^d`.
//!
//! A run from `0` to `n e_1` uses the box `[-w, n+w] x [-w, w]^{d-1}`. If
//! the result is not certified (some boundary-touching path could be as
//! short as `T`), `w` doubles and the field is resampled on the larger box.
//! Edge weights are keyed by lattice position, so interior edges keep
//! their weights across growth.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{Averaged, Engine, FppError, PassageResult};
use crate::lattice::{Region, Site};
use crate::weights::{DistributionSpec, WeightField, DEFAULT_DYADIC_BITS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    /// Initial margin as a fraction of `n`.
    pub kappa: f64,
    /// Doublings allowed before a replica is flagged.
    pub max_grows: u32,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            kappa: 0.5,
            max_grows: 4,
        }
    }
}

/// Smallest `m >= 0` with `m^4 >= n`.
pub fn averaging_radius(n: i64) -> i64 {
    let mut m = 0i64;
    while m * m * m * m < n {
        m += 1;
    }
    m
}

/// The box for a run of length `n` with margin `max(min_margin, ceil(kappa n)) * 2^grows`.
pub fn point_window(dim: usize, n: i64, min_margin: i64, kappa: f64, grows: u32) -> Result<Region, FppError> {
    let base = min_margin.max((kappa * n as f64).ceil() as i64).max(1);
    let w = base << grows;
    let mut lo = vec![-w; dim];
    let mut hi = vec![w; dim];
    lo[0] = -w;
    hi[0] = n + w;
    Ok(Region::boxed(Site::new(&lo)?, Site::new(&hi)?)?)
}

/// Engines keyed by window, shared across replicas.
#[derive(Debug, Default)]
pub struct EngineCache {
    engines: Mutex<HashMap<Region, Arc<Engine>>>,
}

impl EngineCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn engine(&self, region: &Region) -> Arc<Engine> {
        let mut map = self.engines.lock().expect("engine cache poisoned");
        map.entry(*region)
            .or_insert_with(|| Arc::new(Engine::new(region)))
            .clone()
    }
}

/// What a run computes beyond `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunDetail {
    /// Also compute `F_n` on the same field.
    pub average: bool,
    /// Keep the backward distance field, needed for edge responses.
    pub full_fields: bool,
    /// Dyadic truncation depth of the sampler.
    pub dyadic_bits: u32,
}

impl Default for RunDetail {
    fn default() -> Self {
        RunDetail {
            average: false,
            full_fields: false,
            dyadic_bits: DEFAULT_DYADIC_BITS,
        }
    }
}

/// A certified (or flagged) point-to-point run.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub field: WeightField,
    pub result: PassageResult,
    pub averaged: Option<Averaged>,
    pub grows: u32,
    /// Set when the result is still uncertified after `max_grows` doublings.
    pub overflow: bool,
    pub engine: Arc<Engine>,
}

/// `T(0, n e_1)` for the field with `seed`, growing the window as needed.
pub fn run_point(
    spec: &DistributionSpec,
    seed: u64,
    dim: usize,
    n: i64,
    policy: &WindowPolicy,
    detail: RunDetail,
    cache: &EngineCache,
) -> Result<PointRun, FppError> {
    let m = averaging_radius(n);
    let src = Site::origin(dim);
    let dst = Site::axis_point(dim, 0, n);
    let mut grows = 0;
    loop {
        let region = point_window(dim, n, m, policy.kappa, grows)?;
        let engine = cache.engine(&region);
        spec.validate_for_fpp(dim)?;
        let field = WeightField::sample_with_depth(spec, &region, seed, detail.dyadic_bits)?;
        let result = if detail.full_fields {
            engine.passage(&field, &src, &dst)?
        } else {
            engine.passage_light(&field, &src, &dst)?
        };
        if !result.certified && grows < policy.max_grows {
            grows += 1;
            continue;
        }
        let averaged = if detail.average {
            Some(engine.averaged(&field, n, m)?)
        } else {
            None
        };
        let certified = result.certified && averaged.as_ref().is_none_or(|a| a.certified);
        if certified || grows >= policy.max_grows {
            if !certified {
                log::warn!("window still uncertified after {grows} doublings (n={n}, seed={seed})");
            }
            return Ok(PointRun {
                field,
                result,
                averaged,
                grows,
                overflow: !certified,
                engine,
            });
        }
        grows += 1;
    }
}
