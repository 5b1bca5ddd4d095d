//! Nonparametric percentile bootstrap.

use rand::Rng;
use serde::Serialize;

use crate::numeric::{mean_variance, quantile_sorted};
use crate::rng::stream;

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 2000;

/// Nominal coverage of the reported intervals.
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub mean_ci: (f64, f64),
    pub variance_ci: (f64, f64),
    pub mean_half_width: f64,
    pub variance_half_width: f64,
}

/// Statistic replicates over `resamples` index resamples of `0..len`.
/// The generator is keyed by `seed`, so results are reproducible.
pub fn bootstrap_replicates<F>(len: usize, resamples: usize, seed: u64, mut stat: F) -> Vec<f64>
where
    F: FnMut(&[usize]) -> f64,
{
    let mut rng = stream(seed, 0x626f_6f74);
    let mut idx = vec![0usize; len];
    (0..resamples)
        .map(|_| {
            for i in idx.iter_mut() {
                *i = rng.gen_range(0..len);
            }
            stat(&idx)
        })
        .collect()
}

/// Central percentile interval of the replicates.
pub fn percentile_interval(mut replicates: Vec<f64>, level: f64) -> (f64, f64) {
    replicates.retain(|x| !x.is_nan());
    replicates.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    (quantile_sorted(&replicates, a), quantile_sorted(&replicates, 1.0 - a))
}

/// Mean and variance with percentile intervals for both.
pub fn summarize(values: &[f64], resamples: usize, seed: u64) -> EstimatorSummary {
    let (mean, variance) = mean_variance(values);
    let (mean_ci, variance_ci) = if values.len() < 2 || resamples == 0 {
        ((mean, mean), (variance, variance))
    } else {
        let mut buf = vec![0.0; values.len()];
        let mut means = Vec::with_capacity(resamples);
        let vars = bootstrap_replicates(values.len(), resamples, seed, |idx| {
            for (b, &i) in buf.iter_mut().zip(idx) {
                *b = values[i];
            }
            let (m, v) = mean_variance(&buf);
            means.push(m);
            v
        });
        (
            percentile_interval(means, CI_LEVEL),
            percentile_interval(vars, CI_LEVEL),
        )
    };
    EstimatorSummary {
        count: values.len(),
        mean,
        variance,
        mean_ci,
        variance_ci,
        mean_half_width: (mean_ci.1 - mean_ci.0) / 2.0,
        variance_half_width: (variance_ci.1 - variance_ci.0) / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_has_degenerate_intervals() {
        let s = summarize(&[2.0; 50], 200, 1);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.mean_ci, (2.0, 2.0));
        assert_eq!(s.variance_half_width, 0.0);
    }

    #[test]
    fn deterministic_in_seed() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64).collect();
        assert_eq!(summarize(&xs, 300, 5), summarize(&xs, 300, 5));
        assert_ne!(summarize(&xs, 300, 5).mean_ci, summarize(&xs, 300, 6).mean_ci);
    }

    #[test]
    fn intervals_contain_the_estimate_and_shrink() {
        let xs: Vec<f64> = (0..4000u64).map(|i| (crate::rng::mix64(3, i) % 1000) as f64).collect();
        let small = summarize(&xs[..250], 1000, 2);
        let large = summarize(&xs, 1000, 2);
        for s in [&small, &large] {
            assert!(s.mean_ci.0 <= s.mean && s.mean <= s.mean_ci.1);
            assert!(s.variance_ci.0 <= s.variance && s.variance <= s.variance_ci.1);
        }
        assert!(large.mean_half_width < small.mean_half_width);
        assert!(large.variance_half_width < small.variance_half_width);
    }
}
