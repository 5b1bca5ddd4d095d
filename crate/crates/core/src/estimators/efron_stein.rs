//! Efron-Stein upper bounds on `Var(T)` from single-edge resampling.
//!
//! For one field the statistic is `(1/2) sum_e E'[(T - T^{(e)})^2]`, where
//! `T^{(e)}` replaces `t_e` by an independent copy `t'_e`. Its mean over
//! fields is the Efron-Stein bound. Each edge's dependence on `t_e` is a
//! single [`EdgeResponse`], so the inner expectation is either summed
//! exactly over atoms or estimated from `k` fresh draws.

use rand::RngCore;
use serde::Serialize;

use super::bootstrap::{summarize, EstimatorSummary};
use super::records::FppRecord;
use crate::fpp::{EdgeResponse, Engine, FppError, PassageResult};
use crate::numeric::compensated_sum;
use crate::weights::{dyadic_unit, DistributionSpec, WeightField, DEFAULT_DYADIC_BITS};

/// Counter of the resampling stream within a replica seed.
pub const ES_COUNTER: u64 = 0x4553;

#[derive(Debug, Clone, PartialEq)]
pub enum EsMode {
    /// `k` independent draws of `t'_e` per edge.
    MonteCarlo { resamples: u32 },
    /// Exact expectation over a finite list of `(value, probability)` atoms.
    ExactAtoms(Vec<(f64, f64)>),
}

impl EsMode {
    /// Exact when the law has finite support, Monte Carlo otherwise.
    pub fn for_spec(spec: &DistributionSpec, resamples: u32) -> Self {
        match spec.atoms() {
            Some(atoms) => EsMode::ExactAtoms(atoms),
            None => EsMode::MonteCarlo {
                resamples: resamples.max(1),
            },
        }
    }
}

/// `(1/2) sum_e E'[(T^{(e)} - T)^2]` given every edge response of one field.
/// Edges absent from `responses` do not move `T` and contribute nothing.
pub fn replica_es_sum(
    spec: &DistributionSpec,
    responses: &[(usize, EdgeResponse)],
    t: f64,
    mode: &EsMode,
    rng: &mut dyn RngCore,
) -> f64 {
    let terms = responses.iter().map(|(_, r)| match mode {
        EsMode::ExactAtoms(atoms) => compensated_sum(atoms.iter().map(|&(x, p)| {
            let d = r.at(x) - t;
            p * d * d
        })),
        EsMode::MonteCarlo { resamples } => {
            let k = *resamples;
            let s = compensated_sum((0..k).map(|_| {
                let x = spec.inverse_cdf_unit(dyadic_unit(rng.next_u64(), DEFAULT_DYADIC_BITS));
                let d = r.at(x) - t;
                d * d
            }));
            s / k as f64
        }
    });
    0.5 * compensated_sum(terms)
}

/// The per-field Efron-Stein statistic for a passage result.
pub fn efron_stein_bound(
    engine: &Engine,
    field: &WeightField,
    result: &PassageResult,
    mode: &EsMode,
    rng: &mut dyn RngCore,
) -> Result<f64, FppError> {
    let responses = engine.edge_responses(field, result)?;
    Ok(replica_es_sum(field.spec(), &responses, result.t, mode, rng))
}

/// Efron-Stein bound at one `n` against the sample variance of `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsSummary {
    pub n: i64,
    /// Mean of the per-field statistic, with bootstrap interval.
    pub bound: EstimatorSummary,
    pub variance: EstimatorSummary,
    /// `E[t^2] * mean #G_n`.
    pub relaxation: f64,
    /// `bound >= Var(T) - 2 (h_bound + h_var)` with `h` the interval half-widths.
    pub holds_within_ci: bool,
}

/// `None` when no record at `n` carries an Efron-Stein statistic.
pub fn efron_stein_summary(
    records: &[FppRecord],
    n: i64,
    spec: &DistributionSpec,
    resamples: usize,
    seed: u64,
) -> Option<EsSummary> {
    let at_n: Vec<&FppRecord> = records.iter().filter(|r| r.n == n).collect();
    let es: Vec<f64> = at_n.iter().filter_map(|r| r.es_sum).collect();
    if es.is_empty() {
        return None;
    }
    let ts: Vec<f64> = at_n.iter().map(|r| r.t).collect();
    let bound = summarize(&es, resamples, seed);
    let variance = summarize(&ts, resamples, seed ^ 1);
    let mean_g = at_n.iter().map(|r| r.g_int_size as f64).sum::<f64>() / at_n.len() as f64;
    let slack = 2.0 * (bound.mean_half_width + variance.variance_half_width);
    Some(EsSummary {
        n,
        holds_within_ci: bound.mean >= variance.variance - slack,
        relaxation: spec.second_moment() * mean_g,
        bound,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Region, Site};
    use crate::rng::stream;

    fn box_engine(hi: &[i64]) -> (Region, Engine) {
        let region = Region::boxed(Site::origin(hi.len()), Site::new(hi).unwrap()).unwrap();
        let engine = Engine::new(&region);
        (region, engine)
    }

    /// Cheapest edge set whose odd-degree vertices are exactly `src` and
    /// `dst`. With positive weights this is a shortest path.
    fn brute_t(region: &Region, w: &[f64], src: usize, dst: usize) -> f64 {
        let m = w.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..1 << m {
            let mut deg = vec![0u32; region.site_count()];
            let mut cost = 0.0;
            for e in 0..m {
                if mask >> e & 1 == 1 {
                    let (u, v) = region.edge_endpoints(e);
                    deg[u] += 1;
                    deg[v] += 1;
                    cost += w[e];
                }
            }
            if deg[src].is_multiple_of(2) || deg[dst].is_multiple_of(2) {
                continue;
            }
            if deg.iter().enumerate().any(|(i, d)| i != src && i != dst && d % 2 == 1) {
                continue;
            }
            let mut parent: Vec<usize> = (0..deg.len()).collect();
            fn root(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    x = p[x];
                }
                x
            }
            for e in 0..m {
                if mask >> e & 1 == 1 {
                    let (u, v) = region.edge_endpoints(e);
                    let (a, b) = (root(&mut parent, u), root(&mut parent, v));
                    parent[a] = b;
                }
            }
            if root(&mut parent, src) == root(&mut parent, dst) {
                best = best.min(cost);
            }
        }
        best
    }

    /// Exact bound by enumerating every configuration and every replacement.
    fn exhaustive_es(region: &Region, spec: &DistributionSpec, hi: &[i64]) -> (f64, f64) {
        let atoms = spec.atoms().unwrap();
        let m = region.edge_count();
        let src = region.site_index(&Site::origin(2)).unwrap();
        let dst = region.site_index(&Site::new(hi).unwrap()).unwrap();
        let configs = atoms.len().pow(m as u32);
        let decode = |mut c: usize| -> (Vec<f64>, f64) {
            let mut w = Vec::with_capacity(m);
            let mut p = 1.0;
            for _ in 0..m {
                let (x, q) = atoms[c % atoms.len()];
                w.push(x);
                p *= q;
                c /= atoms.len();
            }
            (w, p)
        };
        let mut es = 0.0;
        let mut mean = 0.0;
        let mut second = 0.0;
        for c in 0..configs {
            let (w, p) = decode(c);
            let t = brute_t(region, &w, src, dst);
            mean += p * t;
            second += p * t * t;
            for e in 0..m {
                for &(x, q) in &atoms {
                    let mut w2 = w.clone();
                    w2[e] = x;
                    let d = brute_t(region, &w2, src, dst) - t;
                    es += 0.5 * p * q * d * d;
                }
            }
        }
        (es, second - mean * mean)
    }

    #[test]
    fn exact_atoms_mean_matches_exhaustive_bound() {
        for hi in [[1i64, 1], [2, 1]] {
            let (region, engine) = box_engine(&hi);
            let spec = DistributionSpec::bernoulli(1.0, 2.0, 0.5).unwrap();
            let (oracle, var) = exhaustive_es(&region, &spec, &hi);
            assert!(oracle >= var - 1e-12);
            let mode = EsMode::for_spec(&spec, 1);
            let atoms = spec.atoms().unwrap();
            let m = region.edge_count();
            let dst = Site::new(&hi).unwrap();
            let mut total = 0.0;
            let mut rng = stream(0, 0);
            for c in 0..1usize << m {
                let w: Vec<f64> = (0..m).map(|e| atoms[c >> e & 1].0).collect();
                let field = WeightField::from_weights(&spec, &region, w).unwrap();
                let result = engine.passage(&field, &Site::origin(2), &dst).unwrap();
                let p = 0.5f64.powi(m as i32);
                total += p * efron_stein_bound(&engine, &field, &result, &mode, &mut rng).unwrap();
            }
            assert!((total - oracle).abs() < 1e-12, "{total} vs {oracle}");
        }
    }

    #[test]
    fn monte_carlo_converges_to_exact() {
        let (region, engine) = box_engine(&[3, 2]);
        let spec = DistributionSpec::bernoulli(1.0, 2.0, 0.5).unwrap();
        let field = WeightField::sample(&spec, &region, 11);
        let result = engine
            .passage(&field, &Site::origin(2), &Site::new(&[3, 2]).unwrap())
            .unwrap();
        let exact =
            efron_stein_bound(&engine, &field, &result, &EsMode::for_spec(&spec, 1), &mut stream(0, 0)).unwrap();
        let mc = efron_stein_bound(
            &engine,
            &field,
            &result,
            &EsMode::MonteCarlo { resamples: 20_000 },
            &mut stream(1, 0),
        )
        .unwrap();
        assert!(exact > 0.0);
        assert!((mc - exact).abs() < 0.05 * exact + 0.01, "{mc} vs {exact}");
    }

    #[test]
    fn point_mass_gives_zero() {
        let (region, engine) = box_engine(&[3, 3]);
        let spec = DistributionSpec::point_mass(1.0).unwrap();
        let field = WeightField::sample(&spec, &region, 3);
        let result = engine
            .passage(&field, &Site::origin(2), &Site::new(&[3, 3]).unwrap())
            .unwrap();
        for mode in [EsMode::for_spec(&spec, 4), EsMode::MonteCarlo { resamples: 4 }] {
            assert_eq!(
                efron_stein_bound(&engine, &field, &result, &mode, &mut stream(2, 0)).unwrap(),
                0.0
            );
        }
    }
}
