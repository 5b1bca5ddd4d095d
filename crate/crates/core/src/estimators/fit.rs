//! Power-law fits of the variance and the sublinearity profile.

use super::bootstrap::EstimatorSummary;
use super::EstimatorError;
use crate::numeric::linear_fit;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub chi_hat: f64,
    pub chi_stderr: f64,
    /// Time constant, when mean passage times were supplied.
    pub nu_hat: Option<f64>,
    /// Prefactor `s` in `Var ~ s n^{2 chi}`.
    pub sigma_hat: f64,
    /// Residuals of `log Var` against the fitted line, in input order.
    pub residuals: Vec<f64>,
    pub points: usize,
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<(), EstimatorError> {
    if pairs.len() < 3 {
        return Err(EstimatorError::TooFewPoints {
            needed: 3,
            got: pairs.len(),
        });
    }
    if let Some(&(n, value)) = pairs.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(EstimatorError::NonPositiveVariance { n, value });
    }
    if let Some(&(n, _)) = pairs.iter().find(|p| !(p.0 > 0.0 && p.0.is_finite())) {
        return Err(EstimatorError::Config(format!("size {n} must be positive")));
    }
    Ok(())
}

/// Least squares of `log Var` on `log n`; the slope is `2 chi`.
pub fn fit_chi(pairs: &[(f64, f64)]) -> Result<FitResult, EstimatorError> {
    check_pairs(pairs)?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(EstimatorError::TooFewPoints { needed: 3, got: 1 })?;
    Ok(FitResult {
        chi_hat: fit.slope / 2.0,
        chi_stderr: fit.slope_stderr / 2.0,
        nu_hat: None,
        sigma_hat: fit.intercept.exp(),
        residuals: fit.residuals,
        points: pairs.len(),
    })
}

/// [`fit_chi`] plus `nu` from `E T_n / n = nu + b n^{chi - 1}`, using the
/// fitted `chi` clamped to `[0, 1/2]`. `means` pairs `(n, mean T)`.
pub fn fit_chi_with_means(pairs: &[(f64, f64)], means: &[(f64, f64)]) -> Result<FitResult, EstimatorError> {
    let mut out = fit_chi(pairs)?;
    let chi = out.chi_hat.clamp(0.0, 0.5);
    let xs: Vec<f64> = means.iter().map(|p| p.0.powf(chi - 1.0)).collect();
    let ys: Vec<f64> = means.iter().map(|p| p.1 / p.0).collect();
    out.nu_hat = linear_fit(&xs, &ys).map(|f| f.intercept);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub n: f64,
    pub variance: f64,
    pub var_over_n: f64,
    pub var_log_n_over_n: f64,
    /// Bootstrap interval of `Var / n`.
    pub var_over_n_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublinearityProfile {
    pub rows: Vec<ProfileRow>,
    /// Each `Var/n` interval reaches at or below the previous one's upper end.
    pub var_over_n_nonincreasing: bool,
    /// Largest `c` with `Var >= c log n` at every `n`.
    pub log_lower_c: f64,
    pub log_lower_holds: bool,
}

/// `summaries` pairs each `n` with the summary of `T_n`, in increasing `n`.
pub fn sublinearity_profile(summaries: &[(f64, EstimatorSummary)]) -> Result<SublinearityProfile, EstimatorError> {
    if summaries.len() < 3 {
        return Err(EstimatorError::TooFewPoints {
            needed: 3,
            got: summaries.len(),
        });
    }
    let rows: Vec<ProfileRow> = summaries
        .iter()
        .map(|(n, s)| ProfileRow {
            n: *n,
            variance: s.variance,
            var_over_n: s.variance / n,
            var_log_n_over_n: s.variance * n.ln() / n,
            var_over_n_ci: (s.variance_ci.0 / n, s.variance_ci.1 / n),
        })
        .collect();
    let var_over_n_nonincreasing = rows.windows(2).all(|w| w[1].var_over_n_ci.0 <= w[0].var_over_n_ci.1);
    let log_lower_c = rows
        .iter()
        .filter(|r| r.n > 1.0)
        .map(|r| r.variance / r.n.ln())
        .fold(f64::INFINITY, f64::min);
    Ok(SublinearityProfile {
        var_over_n_nonincreasing,
        log_lower_holds: log_lower_c.is_finite() && log_lower_c > 0.0,
        log_lower_c,
        rows,
    })
}
