//! `Var(T_n)` against `Var(F_n)` on the same fields.

use super::bootstrap::{bootstrap_replicates, percentile_interval, CI_LEVEL};
use super::records::FppRecord;
use super::EstimatorError;
use crate::numeric::mean_variance;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FnRow {
    pub n: i64,
    pub var_t: f64,
    pub var_f: f64,
    pub difference: f64,
    /// `n^{3/4}`.
    pub comparator: f64,
    pub ratio: f64,
    /// Paired bootstrap interval of `ratio`.
    pub ratio_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FnComparison {
    pub rows: Vec<FnRow>,
    /// At each step the ratio's interval starts at or below the previous
    /// interval's upper end.
    pub no_growth: bool,
}

fn abs_diff(ts: &[f64], fs: &[f64]) -> f64 {
    (mean_variance(ts).1 - mean_variance(fs).1).abs()
}

/// Uses the records at each `n` that carry `F_n`.
pub fn compare_fn_variance(records: &[FppRecord], resamples: usize, seed: u64) -> Result<FnComparison, EstimatorError> {
    let mut ns: Vec<i64> = records.iter().filter(|r| r.f_n.is_some()).map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(EstimatorError::Empty);
    }
    let mut rows = Vec::new();
    for n in ns {
        let pairs: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.f_n.map(|f| (r.t, f)))
            .collect();
        let ts: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let fs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let comparator = (n as f64).powf(0.75);
        let var_t = mean_variance(&ts).1;
        let var_f = mean_variance(&fs).1;
        let difference = (var_t - var_f).abs();
        let (mut bt, mut bf) = (vec![0.0; ts.len()], vec![0.0; fs.len()]);
        let reps = bootstrap_replicates(ts.len(), resamples, seed ^ n as u64, |idx| {
            for (k, &i) in idx.iter().enumerate() {
                bt[k] = ts[i];
                bf[k] = fs[i];
            }
            abs_diff(&bt, &bf) / comparator
        });
        let ratio = difference / comparator;
        let ratio_ci = if reps.is_empty() {
            (ratio, ratio)
        } else {
            percentile_interval(reps, CI_LEVEL)
        };
        rows.push(FnRow {
            n,
            var_t,
            var_f,
            difference,
            comparator,
            ratio,
            ratio_ci,
        });
    }
    let no_growth = rows.windows(2).all(|w| w[1].ratio_ci.0 <= w[0].ratio_ci.1);
    Ok(FnComparison { rows, no_growth })
}
