//! Lower and two-sided tails of `T_n` on the scale `sqrt(n / log n)`.

use super::EstimatorError;
use crate::numeric::{linear_fit, mean_variance};
use serde::Serialize;

pub const MIN_REPLICAS: usize = 1000;
/// Rows stop once fewer than this many replicas exceed the threshold.
pub const MIN_EXCEEDANCES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    /// `P(T - mean <= -lambda s)`.
    pub lower: f64,
    /// `P(|T - mean| >= lambda s)`.
    pub two_sided: f64,
    pub log_lower: f64,
    pub log_two_sided: f64,
    pub lower_count: usize,
    pub two_sided_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProfile {
    pub n: f64,
    pub replicas: usize,
    pub mean: f64,
    /// `sqrt(n / log n)`.
    pub scale: f64,
    pub rows: Vec<TailRow>,
    /// Slope of `log P(two-sided)` against `lambda` over rows with `lambda >= 1`.
    pub decay_slope: Option<f64>,
    /// Tail probabilities never increase along the grid and the slope is negative.
    pub decreasing: bool,
}

/// `lambda` in `{0, 0.5, ..., 8}`.
pub fn lambda_grid() -> Vec<f64> {
    (0..=16).map(|k| k as f64 * 0.5).collect()
}

pub fn tail_profile(times: &[f64], n: f64) -> Result<TailProfile, EstimatorError> {
    if times.len() < MIN_REPLICAS {
        return Err(EstimatorError::TooFewReplicas {
            needed: MIN_REPLICAS,
            got: times.len(),
        });
    }
    if !(n > 1.0) {
        return Err(EstimatorError::Config(format!("tail scale needs n > 1, got {n}")));
    }
    let (mean, _) = mean_variance(times);
    let scale = (n / n.ln()).sqrt();
    let total = times.len() as f64;
    let mut rows = Vec::new();
    for lambda in lambda_grid() {
        let cut = lambda * scale;
        let lower_count = times.iter().filter(|&&t| t - mean <= -cut).count();
        let two_sided_count = times.iter().filter(|&&t| (t - mean).abs() >= cut).count();
        if two_sided_count < MIN_EXCEEDANCES {
            break;
        }
        let lower = lower_count as f64 / total;
        let two_sided = two_sided_count as f64 / total;
        rows.push(TailRow {
            lambda,
            lower,
            two_sided,
            log_lower: lower.ln(),
            log_two_sided: two_sided.ln(),
            lower_count,
            two_sided_count,
        });
    }
    let tail: Vec<&TailRow> = rows.iter().filter(|r| r.lambda >= 1.0).collect();
    let decay_slope = linear_fit(
        &tail.iter().map(|r| r.lambda).collect::<Vec<_>>(),
        &tail.iter().map(|r| r.log_two_sided).collect::<Vec<_>>(),
    )
    .map(|f| f.slope);
    let monotone = rows
        .windows(2)
        .all(|w| w[1].two_sided <= w[0].two_sided && w[1].lower <= w[0].lower);
    Ok(TailProfile {
        n,
        replicas: times.len(),
        mean,
        scale,
        decreasing: monotone && decay_slope.is_none_or(|s| s < 0.0),
        decay_slope,
        rows,
    })
}
