//! Exact checks of entropy and variance inequalities on small instances.
//!
//! Functions of `k` independent bits are stored as `2^k` values indexed by
//! bitmask, and every expectation is an exact enumeration with compensated
//! summation. Comparisons allow a rounding slack of [`TOL`] times the scale
//! of the quantities involved; with that slack every check must hold.
//!
//! `0 log 0 = 0` throughout.

use thiserror::Error;

use crate::fpp::FppError;
use crate::numeric::{compensated_sum, weighted_sum};

mod checks;
mod exhaustive;
mod hypercube;
mod mgf;
mod rossignol;
pub mod suite;

pub use checks::{
    efron_stein_check, entropy_variational_check, falik_samorodnitsky_check, falik_samorodnitsky_with,
    log_sobolev_check, tensorization_check, EntLow, EsCheck, FsCheck, LogSobolevCheck, TensorizationCheck,
    TrialOutcome, VariationalCheck,
};
pub use exhaustive::{fpp_exhaustive_check, FppExhaustiveCheck};
pub use hypercube::{HypercubeFunction, MartingaleDecomposition, MartingaleDiagnostics, MAX_BITS};
pub use mgf::{mgf_concentration_check, mgf_grid, MgfCheck, MgfRow, MgfSource, TailRow};
pub use rossignol::{rossignol_check, RossignolCase, RossignolCheck, StepFunction};
pub use suite::{run_suite, CheckSummary, Suite, SuiteReport};

/// Relative rounding slack for floating-point comparisons.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IneqError {
    #[error("negative value {0}")]
    Negative(f64),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("all values are zero")]
    AllZero,
    #[error("probabilities must be nonnegative and sum to 1 (sum {0})")]
    BadProbabilities(f64),
    #[error("length mismatch: {0} values, {1} probabilities")]
    Length(usize, usize),
    #[error("{bits} bits exceeds the limit of {max}")]
    TooManyBits { bits: usize, max: usize },
    #[error("bit order is not a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("bias {0} outside (0, 1)")]
    BadBias(f64),
    #[error("step function: {0}")]
    Step(String),
    #[error("parameters: {0}")]
    Parameters(String),
    #[error("{edges} edges is more than the enumeration limit {max}")]
    TooManyEdges { edges: usize, max: usize },
    #[error("every trial g is infeasible")]
    Infeasible,
    #[error(transparent)]
    Fpp(#[from] FppError),
}

/// `lhs <= rhs` up to rounding at magnitude `scale`.
#[inline]
pub(crate) fn le_tol(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs + TOL * scale.abs().max(1.0)
}

fn check_probs(values: &[f64], probs: &[f64]) -> Result<(), IneqError> {
    if values.len() != probs.len() {
        return Err(IneqError::Length(values.len(), probs.len()));
    }
    let total = compensated_sum(probs.iter().copied());
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(IneqError::BadProbabilities(total));
    }
    Ok(())
}

/// `Ent X = E[X log(X / E X)]` for `X >= 0` under `probs`.
pub fn entropy(values: &[f64], probs: &[f64]) -> Result<f64, IneqError> {
    check_probs(values, probs)?;
    if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
        return Err(IneqError::NonFinite(v));
    }
    if let Some(&v) = values.iter().find(|v| **v < 0.0) {
        return Err(IneqError::Negative(v));
    }
    let mean = weighted_sum(values, probs);
    if mean <= 0.0 {
        return Err(IneqError::AllZero);
    }
    Ok(entropy_unchecked(values, probs, mean))
}

/// Entropy with a known positive mean; rounding below zero is clamped.
pub(crate) fn entropy_unchecked(values: &[f64], probs: &[f64], mean: f64) -> f64 {
    entropy_raw(values, probs, mean).max(0.0)
}

/// Entropy as summed, before clamping.
pub(crate) fn entropy_raw(values: &[f64], probs: &[f64], mean: f64) -> f64 {
    compensated_sum(values.iter().zip(probs).map(|(&x, &p)| p * x_log_ratio(x, mean)))
}

/// `x log(x / mean)`, with `ln_1p` near the mean and a plain ratio far from it
/// so that tiny `x` cannot round the argument to zero.
#[inline]
fn x_log_ratio(x: f64, mean: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 0.5 * mean || x > 2.0 * mean {
        x * (x / mean).ln()
    } else {
        x * ((x - mean) / mean).ln_1p()
    }
}

/// Entropy of a two-point law `(a, b)` with `P(b) = p`; zero when both vanish.
#[inline]
pub(crate) fn entropy2(a: f64, b: f64, p: f64) -> f64 {
    let mean = (1.0 - p) * a + p * b;
    if mean <= 0.0 {
        return 0.0;
    }
    ((1.0 - p) * x_log_ratio(a, mean) + p * x_log_ratio(b, mean)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn tiny_values_keep_their_weight() {
        // x / mean underflows relative to 1 but x log(x / mean) is finite
        let xs = [1e-20, 10.0];
        let e = entropy(&xs, &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(e, 0.5 * 10.0 * (10.0 / 5.0f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn hand_values() {
        assert_eq!(entropy(&[3.0, 3.0], &[0.5, 0.5]).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&[2.0, 0.0], &[0.5, 0.5]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(entropy2(2.0, 0.0, 0.5), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            entropy(&[-1.0, 2.0], &[0.5, 0.5]),
            Err(IneqError::Negative(_))
        ));
        assert!(matches!(entropy(&[0.0, 0.0], &[0.5, 0.5]), Err(IneqError::AllZero)));
        assert!(matches!(
            entropy(&[1.0, 2.0], &[0.5, 0.6]),
            Err(IneqError::BadProbabilities(_))
        ));
        assert!(matches!(entropy(&[1.0], &[0.5, 0.5]), Err(IneqError::Length(1, 2))));
    }

    proptest! {
        #[test]
        fn nonnegative_and_homogeneous(xs in proptest::collection::vec(0.0f64..10.0, 1..12), c in 0.01f64..100.0) {
            let probs = vec![1.0 / xs.len() as f64; xs.len()];
            prop_assume!(xs.iter().any(|&x| x > 0.0));
            let e = entropy(&xs, &probs).unwrap();
            prop_assert!(e >= 0.0);
            let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
            let es = entropy(&scaled, &probs).unwrap();
            prop_assert!((es - c * e).abs() <= 1e-10 * (1.0 + c * e));
        }

        #[test]
        fn two_point_matches_general(a in 0.0f64..10.0, b in 0.0f64..10.0, p in 0.01f64..0.99) {
            prop_assume!(a + b > 0.0);
            let general = entropy(&[a, b], &[1.0 - p, p]).unwrap();
            prop_assert!((entropy2(a, b, p) - general).abs() < 1e-13);
        }
    }
}
