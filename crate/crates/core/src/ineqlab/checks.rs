//! Efron-Stein, Falik-Samorodnitsky, log-Sobolev, tensorization and the
//! variational formula for entropy.

use serde::Serialize;

use super::hypercube::{HypercubeFunction, MartingaleDecomposition, MartingaleDiagnostics};
use super::{entropy2, entropy_unchecked, le_tol, IneqError};
use crate::numeric::{compensated_sum, weighted_sum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EsCheck {
    pub variance: f64,
    /// `(1/2) sum_i E[(f(X) - f(X^{(i)}))^2]`.
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

pub fn efron_stein_check(f: &HypercubeFunction) -> EsCheck {
    let variance = f.variance();
    let bound = 0.5 * compensated_sum((0..f.k()).map(|i| f.resample_sq(i)));
    EsCheck {
        variance,
        bound,
        margin: bound - variance,
        holds: le_tol(variance, bound, bound),
    }
}

/// `Ent(X^2) >= E X^2 log(E X^2 / (E X)^2)` for `X = |Delta_i f|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntLow {
    pub i: usize,
    pub ent: f64,
    pub lower: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsCheck {
    pub variance: f64,
    /// `sum_i (E|Delta_i f|)^2`.
    pub abs_moment_sum: f64,
    /// `Var f log(Var f / sum_i (E|Delta_i f|)^2)`.
    pub lhs: f64,
    /// `sum_i Ent (Delta_i f)^2`.
    pub rhs: f64,
    pub margin: f64,
    /// `Var f = 0`: both sides vanish and nothing is tested.
    pub vacuous: bool,
    pub entlow: Vec<EntLow>,
    #[serde(skip)]
    pub diagnostics: MartingaleDiagnostics,
    pub holds: bool,
}

/// Falik-Samorodnitsky with the filtration in bit order.
pub fn falik_samorodnitsky_check(f: &HypercubeFunction) -> FsCheck {
    falik_samorodnitsky_with(f, &MartingaleDecomposition::new(f))
}

/// Falik-Samorodnitsky for a given decomposition of `f`.
pub fn falik_samorodnitsky_with(f: &HypercubeFunction, m: &MartingaleDecomposition) -> FsCheck {
    let probs = f.probs();
    let variance = f.variance();
    let mut entlow = Vec::new();
    let mut abs_moments = Vec::new();
    let mut ents = Vec::new();
    for (i, d) in m.increments().iter().enumerate() {
        let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
        let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
        let e1 = weighted_sum(&abs, probs);
        let e2 = weighted_sum(&sq, probs);
        let (ent, lower) = if e2 > 0.0 {
            (entropy_unchecked(&sq, probs, e2), e2 * (e2 / (e1 * e1)).ln())
        } else {
            (0.0, 0.0)
        };
        entlow.push(EntLow {
            i: i + 1,
            ent,
            lower,
            holds: le_tol(lower, ent, e2),
        });
        abs_moments.push(e1 * e1);
        ents.push(ent);
    }
    let abs_moment_sum = compensated_sum(abs_moments);
    let rhs = compensated_sum(ents);
    let vacuous = variance <= 0.0 || abs_moment_sum <= 0.0;
    let lhs = if vacuous {
        0.0
    } else {
        variance * (variance / abs_moment_sum).ln()
    };
    FsCheck {
        variance,
        abs_moment_sum,
        lhs,
        rhs,
        margin: rhs - lhs,
        vacuous,
        holds: le_tol(lhs, rhs, variance) && entlow.iter().all(|e| e.holds),
        entlow,
        diagnostics: m.diagnostics(f),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSobolevCheck {
    /// `Ent f^2` under the fair two-point law.
    pub lhs: f64,
    /// `(1/2) |f(0) - f(1)|^2`.
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    /// Both sides agree to rounding.
    pub equality: bool,
}

pub fn log_sobolev_check(f0: f64, f1: f64) -> Result<LogSobolevCheck, IneqError> {
    if let Some(v) = [f0, f1].into_iter().find(|v| !v.is_finite()) {
        return Err(IneqError::NonFinite(v));
    }
    let lhs = entropy2(f0 * f0, f1 * f1, 0.5);
    let rhs = 0.5 * (f0 - f1) * (f0 - f1);
    let scale = f0 * f0 + f1 * f1;
    Ok(LogSobolevCheck {
        lhs,
        rhs,
        margin: rhs - lhs,
        holds: le_tol(lhs, rhs, scale),
        equality: (rhs - lhs).abs() <= super::TOL * scale.max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorizationCheck {
    /// `Ent f`.
    pub lhs: f64,
    /// `sum_i E[Ent_i f]`.
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

pub fn tensorization_check(f: &HypercubeFunction) -> Result<TensorizationCheck, IneqError> {
    if let Some(&v) = f.values().iter().find(|v| **v < 0.0) {
        return Err(IneqError::Negative(v));
    }
    let mean = f.mean();
    let lhs = if mean > 0.0 {
        entropy_unchecked(f.values(), f.probs(), mean)
    } else {
        0.0
    };
    let p = f.bias();
    let v = f.values();
    let rhs = compensated_sum((0..f.k()).map(|i| {
        let bit = 1usize << i;
        compensated_sum(
            (0..v.len())
                .filter(|x| x & bit == 0)
                .map(|x| f.probs()[x] / (1.0 - p) * entropy2(v[x], v[x | bit], p)),
        )
    }));
    Ok(TensorizationCheck {
        lhs,
        rhs,
        margin: rhs - lhs,
        holds: le_tol(lhs, rhs, mean),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    /// `E e^g`.
    pub exp_mean: f64,
    pub feasible: bool,
    /// `E[f g]`.
    pub value: f64,
    /// Infeasible trials hold vacuously.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalCheck {
    pub ent: f64,
    pub trials: Vec<TrialOutcome>,
    /// `E[f g*]` for `g* = log(f / E f)`.
    pub optimizer_value: f64,
    pub optimizer_gap: f64,
    pub holds: bool,
}

/// Optimizer gap allowed, relative to the scale of `E f`.
pub const OPTIMIZER_TOL: f64 = 1e-10;

/// `E[f g] <= Ent f` for every trial with `E e^g <= 1`; `g = -inf` is
/// allowed where `f = 0`.
pub fn entropy_variational_check(
    values: &[f64],
    probs: &[f64],
    trials: &[Vec<f64>],
) -> Result<VariationalCheck, IneqError> {
    let ent = super::entropy(values, probs)?;
    let mean = weighted_sum(values, probs);
    let mut outcomes = Vec::with_capacity(trials.len());
    for g in trials {
        if g.len() != values.len() {
            return Err(IneqError::Length(g.len(), values.len()));
        }
        outcomes.push(trial(values, probs, g, ent, mean));
    }
    if !outcomes.is_empty() && outcomes.iter().all(|t| !t.feasible) {
        return Err(IneqError::Infeasible);
    }
    let star: Vec<f64> = values
        .iter()
        .map(|&x| if x > 0.0 { (x / mean).ln() } else { f64::NEG_INFINITY })
        .collect();
    let optimizer_value = expect_fg(values, probs, &star);
    let optimizer_gap = (optimizer_value - ent).abs();
    Ok(VariationalCheck {
        holds: outcomes.iter().all(|t| t.holds) && optimizer_gap <= OPTIMIZER_TOL * mean.max(1.0),
        ent,
        trials: outcomes,
        optimizer_value,
        optimizer_gap,
    })
}

fn expect_fg(values: &[f64], probs: &[f64], g: &[f64]) -> f64 {
    compensated_sum(
        values
            .iter()
            .zip(g)
            .zip(probs)
            .map(|((&x, &y), &p)| if x == 0.0 { 0.0 } else { p * x * y }),
    )
}

fn trial(values: &[f64], probs: &[f64], g: &[f64], ent: f64, mean: f64) -> TrialOutcome {
    let exp_mean = compensated_sum(g.iter().zip(probs).map(|(y, p)| p * y.exp()));
    let feasible = exp_mean <= 1.0 + super::TOL && g.iter().all(|y| !y.is_nan() && *y < f64::INFINITY);
    let value = expect_fg(values, probs, g);
    TrialOutcome {
        exp_mean,
        feasible,
        value,
        holds: !feasible || le_tol(value, ent, mean),
    }
}
