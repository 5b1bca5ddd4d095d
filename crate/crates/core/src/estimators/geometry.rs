//! Geometry of sampled geodesics: size, windows, animal weights, speed.

use serde::Serialize;
use std::collections::HashMap;

use super::records::{FppRecord, WINDOW_RADII};
use crate::lattice::{ball, Site};
use crate::weights::{log_weight_tail, DistributionSpec, TailPoint};

/// L1 diameter of a vertex set, via `max_s (max s.x - min s.x)` over sign vectors.
pub fn l1_diameter(sites: &[Site]) -> i64 {
    let Some(first) = sites.first() else {
        return 0;
    };
    let dim = first.dim();
    let mut best = 0;
    for signs in 0u32..1 << (dim - 1) {
        let proj = |s: &Site| {
            (0..dim)
                .map(|k| {
                    if k > 0 && signs >> (k - 1) & 1 == 1 {
                        -s.coord(k)
                    } else {
                        s.coord(k)
                    }
                })
                .sum::<i64>()
        };
        let (lo, hi) = sites
            .iter()
            .map(proj)
            .fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
        best = best.max(hi - lo);
    }
    best
}

/// Largest L1 norm of the coordinates other than the first.
pub fn transverse_deviation(sites: &[Site]) -> i64 {
    sites
        .iter()
        .map(|s| (1..s.dim()).map(|k| s.coord(k).abs()).sum::<i64>())
        .max()
        .unwrap_or(0)
}

/// For each radius `m`, the largest number of consecutive-vertex edges of
/// `path` with both ends in one translate `z + B_m`.
pub fn window_counts(path: &[Site], radii: &[i64]) -> Vec<u32> {
    let Some(first) = path.first() else {
        return vec![0; radii.len()];
    };
    let dim = first.dim();
    radii
        .iter()
        .map(|&m| {
            let offsets = ball(m, dim);
            let mut hits: HashMap<Site, u32> = HashMap::new();
            for pair in path.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                for off in &offsets {
                    let z = a.translate(off);
                    if z.l1_distance(&b) <= m {
                        *hits.entry(z).or_insert(0) += 1;
                    }
                }
            }
            hits.into_values().max().unwrap_or(0)
        })
        .collect()
}

/// A per-`n` statistic with its spread `max / min` across `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleCheck {
    pub per_n: Vec<(i64, f64)>,
    pub spread: f64,
    /// `spread <= 3`.
    pub bounded: bool,
}

pub const SPREAD_LIMIT: f64 = 3.0;

fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi <= 0.0 && lo >= 0.0 {
        1.0
    } else if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn sizes(records: &[FppRecord]) -> Vec<i64> {
    let mut ns: Vec<i64> = records.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn mean_at(records: &[FppRecord], n: i64, f: impl Fn(&FppRecord) -> f64) -> f64 {
    let (s, c) = records
        .iter()
        .filter(|r| r.n == n)
        .fold((0.0, 0usize), |(s, c), r| (s + f(r), c + 1));
    s / c as f64
}

fn scale_check(records: &[FppRecord], f: impl Fn(&FppRecord) -> f64) -> ScaleCheck {
    let per_n: Vec<(i64, f64)> = sizes(records)
        .into_iter()
        .map(|n| (n, mean_at(records, n, &f)))
        .collect();
    let spread = spread(per_n.iter().map(|p| p.1));
    ScaleCheck {
        per_n,
        spread,
        bounded: spread <= SPREAD_LIMIT,
    }
}

/// Mean `#G_n / n` per `n`.
pub fn g_linearity(records: &[FppRecord]) -> ScaleCheck {
    scale_check(records, |r| r.g_int_size as f64 / r.n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowStats {
    /// `(n, [E max count / 2m for m in WINDOW_RADII])`.
    pub per_n: Vec<(i64, [f64; 3])>,
    /// Largest spread across `m` at a single `n`.
    pub spread_across_m: f64,
    pub bounded: bool,
}

/// `None` when the records carry no window counts.
pub fn geodesic_window_stats(records: &[FppRecord]) -> Option<WindowStats> {
    let with: Vec<FppRecord> = records.iter().filter(|r| r.window_counts.is_some()).cloned().collect();
    if with.is_empty() {
        return None;
    }
    let per_n: Vec<(i64, [f64; 3])> = sizes(&with)
        .into_iter()
        .map(|n| {
            let mut row = [0.0; 3];
            for (i, m) in WINDOW_RADII.iter().enumerate() {
                row[i] = mean_at(&with, n, |r| r.window_counts.expect("filtered")[i] as f64) / (2 * m) as f64;
            }
            (n, row)
        })
        .collect();
    let spread_across_m = per_n
        .iter()
        .map(|(_, row)| spread(row.iter().copied()))
        .fold(1.0, f64::max);
    Some(WindowStats {
        per_n,
        spread_across_m,
        bounded: spread_across_m <= SPREAD_LIMIT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnimalStats {
    /// Mean `Y_n / n` per `n`.
    pub y_over_n: ScaleCheck,
    /// `Y_n >= #G_n` on every record.
    pub dominates_g: bool,
}

pub fn animal_weight_stats(records: &[FppRecord]) -> AnimalStats {
    AnimalStats {
        y_over_n: scale_check(records, |r| r.y_n / r.n as f64),
        dominates_g: records.iter().all(|r| r.y_n >= r.g_int_size as f64),
    }
}

/// Tail of the per-edge weight `1 - log F(t)` at `r = 2..=8`.
pub fn animal_weight_tail(spec: &DistributionSpec, samples: u64, seed: u64) -> Vec<TailPoint> {
    let rs: Vec<f64> = (2..=8).map(f64::from).collect();
    log_weight_tail(spec, samples, seed, &rs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedStats {
    /// `(n, min over replicas of T / #path)`.
    pub per_n: Vec<(i64, f64)>,
    /// Every value is positive and the last is at least half the largest.
    pub stable_positive: bool,
}

pub fn geodesic_speed_stats(records: &[FppRecord]) -> SpeedStats {
    let per_n: Vec<(i64, f64)> = sizes(records)
        .into_iter()
        .map(|n| {
            let a = records
                .iter()
                .filter(|r| r.n == n && r.geo_len > 0)
                .map(|r| r.t / r.geo_len as f64)
                .fold(f64::INFINITY, f64::min);
            (n, a)
        })
        .collect();
    let top = per_n.iter().map(|p| p.1).fold(0.0, f64::max);
    let stable_positive = !per_n.is_empty()
        && per_n.iter().all(|p| p.1 > 0.0 && p.1.is_finite())
        && per_n.last().is_some_and(|p| p.1 >= 0.5 * top);
    SpeedStats { per_n, stable_positive }
}
