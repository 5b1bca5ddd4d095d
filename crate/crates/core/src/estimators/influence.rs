//! Per-edge membership frequencies in `G` on the torus.
//!
//! The torus law is invariant under translations, so within one axis class
//! every edge has the same membership probability. Uniformity is tested
//! with a chi-square statistic on the membership counts. Memberships of
//! different edges in one replica are dependent, so besides the asymptotic
//! chi-square tail the p-value is also computed by randomization: each
//! replica's set `G` is shifted by an independent uniform translation,
//! which leaves the joint law unchanged under uniformity.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::records::TorusRecord;
use super::EstimatorError;
use crate::lattice::{EdgeId, Region, Site};
use crate::rng::stream;

pub const DEFAULT_RANDOMIZATIONS: usize = 999;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisUniformity {
    pub axis: usize,
    pub edges: usize,
    /// Total memberships over replicas and edges of this axis.
    pub total: u64,
    pub chi_square: f64,
    pub df: usize,
    pub p_asymptotic: f64,
    pub p_randomized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceMap {
    pub n: i64,
    pub replicas: usize,
    /// `P(e in G)` estimates by edge index of the torus.
    pub frequencies: Vec<f64>,
    /// Sum of the frequencies, an estimate of `E #G`.
    pub expected_size: f64,
    pub max_frequency: f64,
    pub axes: Vec<AxisUniformity>,
}

fn chi_square(counts: &[u32], edges: &[usize]) -> f64 {
    let total: u64 = edges.iter().map(|&e| u64::from(counts[e])).sum();
    if total == 0 {
        return 0.0;
    }
    let expect = total as f64 / edges.len() as f64;
    edges
        .iter()
        .map(|&e| {
            let d = f64::from(counts[e]) - expect;
            d * d / expect
        })
        .sum()
}

/// Influence statistics at size `n` from torus records of dimension `dim`.
pub fn influence_map(
    records: &[TorusRecord],
    dim: usize,
    n: i64,
    randomizations: usize,
    seed: u64,
) -> Result<InfluenceMap, EstimatorError> {
    let at_n: Vec<&TorusRecord> = records.iter().filter(|r| r.n == n).collect();
    if at_n.is_empty() {
        return Err(EstimatorError::TooFewReplicas { needed: 1, got: 0 });
    }
    let region = Region::torus(dim, n).map_err(crate::fpp::FppError::from)?;
    let m = region.edge_count();
    let ids: Vec<EdgeId> = region.enumerate_edges();
    let mut counts = vec![0u32; m];
    for r in &at_n {
        for &e in &r.g_members {
            if e >= m {
                return Err(EstimatorError::Schema(format!(
                    "edge index {e} outside the torus of side {n}"
                )));
            }
            counts[e] += 1;
        }
    }
    let classes: Vec<Vec<usize>> = (0..dim)
        .map(|a| (0..m).filter(|&e| ids[e].axis == a).collect())
        .collect();
    let observed: Vec<f64> = classes.iter().map(|c| chi_square(&counts, c)).collect();

    let mut exceed = vec![0usize; dim];
    let mut rng = stream(seed, n as u64);
    let mut shifted = vec![0u32; m];
    for _ in 0..randomizations {
        shifted.iter_mut().for_each(|c| *c = 0);
        for r in &at_n {
            let coords: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..n)).collect();
            let by = Site::new(&coords).map_err(crate::fpp::FppError::from)?;
            for &e in &r.g_members {
                let id = ids[e];
                let moved = EdgeId::new(region.normalize(id.base.translate(&by)), id.axis);
                let k = region.edge_index(&moved).expect("translate stays on the torus");
                shifted[k] += 1;
            }
        }
        for (a, class) in classes.iter().enumerate() {
            if chi_square(&shifted, class) >= observed[a] {
                exceed[a] += 1;
            }
        }
    }

    let axes = classes
        .iter()
        .enumerate()
        .map(|(a, class)| {
            let total: u64 = class.iter().map(|&e| u64::from(counts[e])).sum();
            let df = class.len() - 1;
            let p_asymptotic = if total == 0 {
                1.0
            } else {
                ChiSquared::new(df as f64)
                    .map(|d| d.sf(observed[a]))
                    .unwrap_or(f64::NAN)
            };
            let p_randomized = if total == 0 {
                1.0
            } else {
                (1 + exceed[a]) as f64 / (1 + randomizations) as f64
            };
            AxisUniformity {
                axis: a,
                edges: class.len(),
                total,
                chi_square: observed[a],
                df,
                p_asymptotic,
                p_randomized,
            }
        })
        .collect();
    let reps = at_n.len() as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| f64::from(c) / reps).collect();
    Ok(InfluenceMap {
        n,
        replicas: at_n.len(),
        expected_size: at_n.iter().map(|r| r.g_members.len()).sum::<usize>() as f64 / reps,
        max_frequency: frequencies.iter().copied().fold(0.0, f64::max),
        frequencies,
        axes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: i64, members: Vec<usize>) -> TorusRecord {
        TorusRecord {
            n,
            replica: 0,
            t: 0.0,
            g_dag_size: 0,
            g_int_size: members.len(),
            geo_len: 0,
            window_grows: 0,
            overflow: false,
            g_members: members,
        }
    }

    #[test]
    fn empty_intersections() {
        let recs = vec![rec(4, vec![]), rec(4, vec![])];
        let map = influence_map(&recs, 2, 4, 50, 0).unwrap();
        assert!(map.frequencies.iter().all(|&f| f == 0.0));
        assert_eq!(map.max_frequency, 0.0);
        assert!(map.axes.iter().all(|a| a.p_randomized == 1.0 && a.p_asymptotic == 1.0));
        assert!(influence_map(&recs, 2, 8, 10, 0).is_err());
    }

    #[test]
    fn frequencies_sum_to_mean_size() {
        let recs = vec![rec(4, vec![0, 3, 9]), rec(4, vec![3]), rec(4, vec![])];
        let map = influence_map(&recs, 2, 4, 10, 0).unwrap();
        let sum: f64 = map.frequencies.iter().sum();
        assert!((sum - map.expected_size).abs() < 1e-12);
        assert!((map.max_frequency - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_a_pinned_edge_and_accepts_translated_copies() {
        let region = Region::torus(2, 6).unwrap();
        let ids = region.enumerate_edges();
        let pattern = [
            EdgeId::new(Site::new(&[0, 0]).unwrap(), 0),
            EdgeId::new(Site::new(&[1, 0]).unwrap(), 0),
        ];
        let mut rng = stream(5, 0);
        let mut pinned = Vec::new();
        let mut moving = Vec::new();
        for _ in 0..300 {
            let idx = |id: &EdgeId| region.edge_index(id).unwrap();
            pinned.push(rec(6, pattern.iter().map(idx).collect()));
            let by = Site::new(&[rng.gen_range(0..6), rng.gen_range(0..6)]).unwrap();
            let mut m: Vec<usize> = pattern
                .iter()
                .map(|p| idx(&EdgeId::new(region.normalize(p.base.translate(&by)), 0)))
                .collect();
            m.sort_unstable();
            moving.push(rec(6, m));
        }
        assert_eq!(ids.len(), region.edge_count());
        let bad = influence_map(&pinned, 2, 6, 199, 1).unwrap();
        assert!(bad.axes[0].p_randomized < 0.01);
        assert!(bad.axes[0].p_asymptotic < 1e-6);
        let good = influence_map(&moving, 2, 6, 199, 1).unwrap();
        assert!(good.axes[0].p_randomized > 0.01);
    }
}
