//! From a variance bound on `e^{tZ/2}` to exponential concentration.
//!
//! If `Var e^{tZ/2} <= C t^2 E e^{tZ}` for `t` in `(0, B^{-1/2})` with
//! `0 < C <= B`, then for the centred variable `log E e^{tZ} <= -2 log(1 - C t^2)`
//! and `P(Z - E Z >= lambda) <= e^{-t lambda} / (1 - C t^2)^2`. The premise
//! is unchanged by shifting `Z`, so it is tested on the centred law as well.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{le_tol, IneqError};
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, PartialEq)]
pub enum MgfSource {
    /// Centred normal law with standard deviation `sd`, by closed form.
    Gaussian { sd: f64 },
    /// Finite law.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    /// Empirical law of a sample.
    Sample(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfRow {
    pub t: f64,
    /// `Var e^{tZ/2}`.
    pub premise_lhs: f64,
    /// `C t^2 E e^{tZ}`.
    pub premise_rhs: f64,
    pub premise: bool,
    pub log_mgf: f64,
    /// `-2 log(1 - C t^2)`.
    pub log_bound: f64,
    pub conclusion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    /// `P(Z - E Z >= lambda)`.
    pub probability: f64,
    /// Best `e^{-t lambda} / (1 - C t^2)^2` over the grid prefix where the premise holds.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfCheck {
    pub c: f64,
    pub b: f64,
    pub rows: Vec<MgfRow>,
    /// Premise holds at every grid point.
    pub premise_holds: bool,
    /// Conclusion holds on the grid prefix where the premise holds.
    pub conclusion_holds: bool,
    pub tail: Vec<TailRow>,
    pub holds: bool,
}

/// `{B^{-1/2} j / 64 : j = 1..63}`.
pub fn mgf_grid(b: f64) -> Vec<f64> {
    (1..64).map(|j| j as f64 / 64.0 / b.sqrt()).collect()
}

struct Law {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl Law {
    fn centred(values: Vec<f64>, probs: Vec<f64>) -> Self {
        let mean = compensated_sum(values.iter().zip(&probs).map(|(x, p)| x * p));
        Law {
            values: values.iter().map(|x| x - mean).collect(),
            probs,
        }
    }

    fn log_mgf(&self, t: f64) -> f64 {
        let top = self
            .values
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, _)| t * x)
            .fold(f64::NEG_INFINITY, f64::max);
        top + compensated_sum(
            self.values
                .iter()
                .zip(&self.probs)
                .map(|(x, p)| p * (t * x - top).exp()),
        )
        .ln()
    }

    fn upper_tail(&self, lambda: f64) -> f64 {
        compensated_sum(
            self.values
                .iter()
                .zip(&self.probs)
                .filter(|(x, _)| **x >= lambda)
                .map(|(_, p)| *p),
        )
    }
}

pub fn mgf_concentration_check(source: &MgfSource, c: f64, b: f64, lambdas: &[f64]) -> Result<MgfCheck, IneqError> {
    if !(c > 0.0 && c <= b && b.is_finite()) {
        return Err(IneqError::Parameters(format!("need 0 < C <= B, got C = {c}, B = {b}")));
    }
    let law = match source {
        MgfSource::Gaussian { sd } => {
            if !(*sd >= 0.0 && sd.is_finite()) {
                return Err(IneqError::Parameters(format!("standard deviation {sd}")));
            }
            None
        }
        MgfSource::Discrete { values, probs } => {
            super::check_probs(values, probs)?;
            Some(Law::centred(values.clone(), probs.clone()))
        }
        MgfSource::Sample(xs) => {
            if xs.is_empty() {
                return Err(IneqError::Parameters("empty sample".into()));
            }
            let p = 1.0 / xs.len() as f64;
            Some(Law::centred(xs.clone(), vec![p; xs.len()]))
        }
    };
    if let Some(l) = &law {
        if let Some(&v) = l.values.iter().find(|v| !v.is_finite()) {
            return Err(IneqError::NonFinite(v));
        }
    }
    let log_mgf = |t: f64| match (&law, source) {
        (Some(l), _) => l.log_mgf(t),
        (None, MgfSource::Gaussian { sd }) => 0.5 * t * t * sd * sd,
        _ => unreachable!("law is built for every non-Gaussian source"),
    };
    let rows: Vec<MgfRow> = mgf_grid(b)
        .into_iter()
        .map(|t| {
            let lm = log_mgf(t);
            let lh = log_mgf(t / 2.0);
            // Var e^{tZ/2} = E e^{tZ} (1 - e^{2 log E e^{tZ/2} - log E e^{tZ}})
            let mgf = lm.exp();
            let premise_lhs = -mgf * (2.0 * lh - lm).exp_m1();
            let premise_rhs = c * t * t * mgf;
            let log_bound = -2.0 * (-c * t * t).ln_1p();
            MgfRow {
                t,
                premise_lhs,
                premise_rhs,
                premise: le_tol(premise_lhs, premise_rhs, premise_rhs),
                log_mgf: lm,
                log_bound,
                conclusion: le_tol(lm, log_bound, log_bound),
            }
        })
        .collect();
    let premise_holds = rows.iter().all(|r| r.premise);
    // the conclusion at t needs the premise on all of (0, t]
    let valid = rows.iter().take_while(|r| r.premise).count();
    let conclusion_holds = rows[..valid].iter().all(|r| r.conclusion);
    let tail: Vec<TailRow> = lambdas
        .iter()
        .map(|&lambda| {
            let probability = match (&law, source) {
                (Some(l), _) => l.upper_tail(lambda),
                (None, MgfSource::Gaussian { sd }) if *sd > 0.0 => {
                    Normal::new(0.0, *sd).map(|n| n.sf(lambda)).unwrap_or(f64::NAN)
                }
                _ => f64::from(u8::from(lambda <= 0.0)),
            };
            let bound = rows[..valid]
                .iter()
                .map(|r| (-r.t * lambda + r.log_bound).exp())
                .fold(f64::INFINITY, f64::min);
            TailRow {
                lambda,
                probability,
                bound,
                holds: le_tol(probability, bound, bound.min(1.0)),
            }
        })
        .collect();
    Ok(MgfCheck {
        c,
        b,
        holds: conclusion_holds && tail.iter().all(|r| r.holds),
        premise_holds,
        conclusion_holds,
        rows,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid() {
        let g = mgf_grid(4.0);
        assert_eq!(g.len(), 63);
        assert_eq!(g[0], 0.5 / 64.0);
        assert!(g.iter().all(|&t| t < 0.5));
    }

    #[test]
    fn degenerate_law() {
        let z = MgfSource::Discrete {
            values: vec![0.0],
            probs: vec![1.0],
        };
        let c = mgf_concentration_check(&z, 1.0, 1.0, &[0.5, 1.0]).unwrap();
        assert!(c.premise_holds && c.holds);
        assert!(c.rows.iter().all(|r| r.log_mgf == 0.0 && r.premise_lhs == 0.0));
        assert!(c.tail.iter().all(|r| r.probability == 0.0));
    }

    #[test]
    fn standard_gaussian() {
        let c = mgf_concentration_check(&MgfSource::Gaussian { sd: 1.0 }, 1.0, 1.0, &[1.0, 2.0, 3.0]).unwrap();
        assert!(c.premise_holds);
        assert!(c.conclusion_holds && c.holds);
        // premise fails for a constant that is too small
        let tight = mgf_concentration_check(&MgfSource::Gaussian { sd: 1.0 }, 0.1, 1.0, &[]).unwrap();
        assert!(!tight.premise_holds);
    }

    #[test]
    fn discrete_matches_gaussian_sample_shape() {
        let xs: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 2000) as f64 / 1000.0).collect();
        let c = mgf_concentration_check(&MgfSource::Sample(xs), 1.0, 1.0, &[0.5, 1.0]).unwrap();
        assert!(c.premise_holds && c.holds);
        assert!(mgf_concentration_check(&MgfSource::Sample(vec![]), 1.0, 1.0, &[]).is_err());
        assert!(mgf_concentration_check(&MgfSource::Gaussian { sd: 1.0 }, 2.0, 1.0, &[]).is_err());
    }
}
