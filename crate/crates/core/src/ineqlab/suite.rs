//! Randomized search for counterexamples across every check.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::checks::falik_samorodnitsky_with;
use super::hypercube::{HypercubeFunction, MartingaleDecomposition};
use super::mgf::{mgf_concentration_check, MgfSource};
use super::rossignol::{q, rossignol_check, StepFunction};
use super::{
    efron_stein_check, entropy_raw, entropy_variational_check, fpp_exhaustive_check, log_sobolev_check,
    tensorization_check, IneqError, TOL,
};
use crate::lattice::{Region, Site};
use crate::rng::{mix64, stream};
use crate::weights::DistributionSpec;

/// Randomized instances per check in the full suite.
pub const DEFAULT_INSTANCES: usize = 10_000;

/// Trial functions per variational instance.
const VARIATIONAL_TRIALS: usize = 8;

/// Martingale identities must hold to this relative accuracy.
const MARTINGALE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    EfronStein,
    FalikSamorodnitsky,
    LogSobolev,
    Tensorization,
    Variational,
    Rossignol,
    Entropy,
    Mgf,
    FppExhaustive,
}

impl Suite {
    pub const CHECKS: [Suite; 9] = [
        Suite::EfronStein,
        Suite::FalikSamorodnitsky,
        Suite::LogSobolev,
        Suite::Tensorization,
        Suite::Variational,
        Suite::Rossignol,
        Suite::Entropy,
        Suite::Mgf,
        Suite::FppExhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::EfronStein => "efron-stein",
            Suite::FalikSamorodnitsky => "falik-samorodnitsky",
            Suite::LogSobolev => "log-sobolev",
            Suite::Tensorization => "tensorization",
            Suite::Variational => "variational",
            Suite::Rossignol => "rossignol",
            Suite::Entropy => "entropy",
            Suite::Mgf => "mgf",
            Suite::FppExhaustive => "fpp-exhaustive",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::CHECKS.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = IneqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        std::iter::once(Suite::All)
            .chain(Suite::CHECKS)
            .find(|c| c.name() == s)
            .ok_or_else(|| IneqError::Parameters(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: Suite,
    pub instances: usize,
    pub violations: usize,
    /// Instances where the check has nothing to test.
    pub vacuous: usize,
    /// Smallest `rhs - lhs` seen; negative only for a violation.
    pub min_margin: f64,
    /// SHA-256 of the inputs attaining `min_margin`.
    pub worst_digest: String,
    pub worst_input: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckSummary>,
    pub holds: bool,
}

struct Outcome {
    margin: f64,
    holds: bool,
    vacuous: bool,
    input: String,
}

impl Outcome {
    fn new(margin: f64, holds: bool, input: String) -> Self {
        Outcome {
            margin,
            holds,
            vacuous: false,
            input,
        }
    }
}

/// Runs `instances` randomized cases of each selected check. Instance `i`
/// of a check draws from its own stream, so results do not depend on the
/// thread count.
pub fn run_suite(suite: Suite, seed: u64, instances: usize) -> Result<SuiteReport, IneqError> {
    let mut checks = Vec::new();
    for check in suite.members() {
        let outcomes: Vec<Outcome> = if check == Suite::FppExhaustive {
            fpp_cases()?
        } else {
            let key = mix64(seed, check as u64);
            (0..instances)
                .into_par_iter()
                .map(|i| instance(check, &mut stream(key, i as u64)))
                .collect::<Result<_, _>>()?
        };
        checks.push(summarize(check, &outcomes));
    }
    Ok(SuiteReport {
        suite,
        seed,
        holds: checks.iter().all(|c| c.holds),
        checks,
    })
}

fn summarize(check: Suite, outcomes: &[Outcome]) -> CheckSummary {
    let worst = outcomes.iter().filter(|o| !o.vacuous).min_by(|a, b| {
        (a.holds, a.margin)
            .partial_cmp(&(b.holds, b.margin))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let violations = outcomes.iter().filter(|o| !o.holds).count();
    CheckSummary {
        check,
        instances: outcomes.len(),
        violations,
        vacuous: outcomes.iter().filter(|o| o.vacuous).count(),
        min_margin: worst.map_or(0.0, |o| o.margin),
        worst_digest: worst.map_or_else(String::new, |o| hex::encode(Sha256::digest(o.input.as_bytes()))),
        worst_input: worst.map_or_else(String::new, |o| o.input.clone()),
        holds: violations == 0,
    }
}

fn instance(check: Suite, rng: &mut ChaCha8Rng) -> Result<Outcome, IneqError> {
    match check {
        Suite::EfronStein => {
            let f = random_function(rng, 8, false)?;
            let c = efron_stein_check(&f);
            Ok(Outcome::new(c.margin, c.holds, describe(&f)))
        }
        Suite::FalikSamorodnitsky => falik_samorodnitsky_instance(rng),
        Suite::LogSobolev => {
            let (a, b) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            let c = log_sobolev_check(a, b)?;
            Ok(Outcome::new(c.margin, c.holds, format!("{a:?} {b:?}")))
        }
        Suite::Tensorization => {
            let f = random_function(rng, 4, true)?;
            let c = tensorization_check(&f)?;
            Ok(Outcome::new(c.margin, c.holds, describe(&f)))
        }
        Suite::Variational => variational_instance(rng),
        Suite::Rossignol => rossignol_instance(rng),
        Suite::Entropy => {
            let (values, probs) = random_law(rng, true);
            let mean = crate::numeric::weighted_sum(&values, &probs);
            let raw = if mean > 0.0 {
                entropy_raw(&values, &probs, mean)
            } else {
                0.0
            };
            let mut o = Outcome::new(raw, raw >= -TOL * mean.max(1.0), format!("{values:?} {probs:?}"));
            o.vacuous = mean <= 0.0;
            Ok(o)
        }
        Suite::Mgf => mgf_instance(rng),
        Suite::All | Suite::FppExhaustive => unreachable!("not a randomized check"),
    }
}

fn describe(f: &HypercubeFunction) -> String {
    format!("k={} p={:?} {:?}", f.k(), f.bias(), f.values())
}

/// Values drawn from one of several shapes so that ties, zeros and Boolean
/// functions all appear.
fn random_values(rng: &mut ChaCha8Rng, len: usize, nonnegative: bool) -> Vec<f64> {
    let lo = if nonnegative { 0.0 } else { -5.0 };
    match rng.gen_range(0..4) {
        0 => (0..len).map(|_| rng.gen_range(lo..5.0)).collect(),
        1 => (0..len).map(|_| f64::from(rng.gen_range(0u8..4))).collect(),
        2 => (0..len).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect(),
        _ => (0..len)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0f64).powi(4) * 20.0
                }
            })
            .collect(),
    }
}

fn random_function(rng: &mut ChaCha8Rng, max_k: usize, nonnegative: bool) -> Result<HypercubeFunction, IneqError> {
    let k = rng.gen_range(1..=max_k);
    let p = if rng.gen_bool(0.5) {
        0.5
    } else {
        rng.gen_range(0.02..0.98)
    };
    HypercubeFunction::with_bias(k, random_values(rng, 1 << k, nonnegative), p)
}

fn random_law(rng: &mut ChaCha8Rng, nonnegative: bool) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(1..=8);
    let values = random_values(rng, n, nonnegative);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    (values, raw.iter().map(|w| w / total).collect())
}

fn falik_samorodnitsky_instance(rng: &mut ChaCha8Rng) -> Result<Outcome, IneqError> {
    let f = random_function(rng, 6, false)?;
    let mut order: Vec<usize> = (0..f.k()).collect();
    order.shuffle(rng);
    let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut margin = f64::INFINITY;
    let mut holds = true;
    let mut vacuous = true;
    for m in [
        MartingaleDecomposition::new(&f),
        MartingaleDecomposition::with_order(&f, &order)?,
    ] {
        let c = falik_samorodnitsky_with(&f, &m);
        let d = c.diagnostics;
        let identities = d.telescoping.max(d.orthogonality / scale).max(d.parseval / scale) <= MARTINGALE_TOL * scale;
        holds &= c.holds && identities;
        vacuous &= c.vacuous;
        margin = margin.min(c.margin);
        for e in &c.entlow {
            margin = margin.min(e.ent - e.lower);
        }
    }
    let mut o = Outcome::new(margin, holds, format!("{} order={order:?}", describe(&f)));
    o.vacuous = vacuous && holds;
    Ok(o)
}

fn variational_instance(rng: &mut ChaCha8Rng) -> Result<Outcome, IneqError> {
    let (mut values, probs) = random_law(rng, true);
    if values.iter().all(|v| *v == 0.0) {
        values[0] = 1.0;
    }
    let n = values.len();
    let trials: Vec<Vec<f64>> = (0..VARIATIONAL_TRIALS)
        .map(|_| {
            let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let log_z = crate::numeric::compensated_sum(h.iter().zip(&probs).map(|(y, p)| p * y.exp())).ln();
            let slack = if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.0..0.5)
            };
            h.iter()
                .zip(&values)
                .map(|(y, &x)| {
                    if x == 0.0 && rng.gen_bool(0.2) {
                        f64::NEG_INFINITY
                    } else {
                        y - log_z - slack
                    }
                })
                .collect()
        })
        .collect();
    let c = entropy_variational_check(&values, &probs, &trials)?;
    let best = c
        .trials
        .iter()
        .filter(|t| t.feasible)
        .map(|t| t.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome::new(
        c.ent - best,
        c.holds,
        format!("{values:?} {probs:?} {trials:?}"),
    ))
}

fn rossignol_instance(rng: &mut ChaCha8Rng) -> Result<Outcome, IneqError> {
    let den = rng.gen_range(2..=12i64);
    let pieces = rng.gen_range(1..=5usize).min(den as usize);
    let mut cuts: Vec<i64> = (1..den).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(pieces - 1).collect();
    cuts.sort_unstable();
    let starts: Vec<_> = std::iter::once(0)
        .chain(cuts.iter().copied())
        .map(|c| q(c, den))
        .collect();
    let vden = rng.gen_range(1..=4i64);
    let mut level = 0i64;
    let values: Vec<_> = (0..starts.len())
        .map(|_| {
            level += rng.gen_range(0..=3);
            q(level, vden)
        })
        .collect();
    let f = StepFunction::new(starts, values)?;
    let last = cuts.last().copied().unwrap_or(0);
    let a = q(rng.gen_range(last..=den), den);
    let tden = rng.gen_range(2..=12i64);
    let tau = q(rng.gen_range(1..=tden / 2), tden);
    let c = rossignol_check(&f, &a, &tau)?;
    let margin = c
        .cases
        .iter()
        .filter(|k| k.applicable)
        .map(|k| k.margin)
        .fold(f64::INFINITY, f64::min);
    let input = format!(
        "starts={:?} values={:?} a={a} tau={tau}",
        f.starts().iter().map(ToString::to_string).collect::<Vec<_>>(),
        f.values().iter().map(ToString::to_string).collect::<Vec<_>>()
    );
    Ok(Outcome::new(margin, c.holds, input))
}

fn mgf_instance(rng: &mut ChaCha8Rng) -> Result<Outcome, IneqError> {
    let (source, c) = if rng.gen_bool(0.3) {
        let sd = rng.gen_range(0.0..2.0f64);
        (
            MgfSource::Gaussian { sd },
            (sd * sd / 4.0).max(0.01) * rng.gen_range(1.0..2.0),
        )
    } else {
        let (values, probs) = random_law(rng, false);
        let scale = rng.gen_range(0.1..2.0);
        let values = values.iter().map(|v| v * scale / 5.0).collect();
        (MgfSource::Discrete { values, probs }, rng.gen_range(0.05..2.0))
    };
    let b = c * rng.gen_range(1.0..3.0);
    let lambdas = [0.25, 0.5, 1.0, 2.0, 4.0];
    let m = mgf_concentration_check(&source, c, b, &lambdas)?;
    let rows = m.rows.iter().take_while(|r| r.premise);
    let margin = rows
        .map(|r| r.log_bound - r.log_mgf)
        .chain(
            m.tail
                .iter()
                .filter(|t| t.bound.is_finite())
                .map(|t| t.bound - t.probability),
        )
        .fold(f64::INFINITY, f64::min);
    let mut o = Outcome::new(margin, m.holds, format!("{source:?} C={c:?} B={b:?}"));
    o.vacuous = !m.rows[0].premise;
    Ok(o)
}

/// The 2x2-site and 3x2-site boxes under a few Bernoulli laws.
fn fpp_cases() -> Result<Vec<Outcome>, IneqError> {
    let laws = [
        (0.0, 1.0, 0.5),
        (1.0, 2.0, 0.5),
        (1.0, 3.0, 0.3),
        (0.5, 4.0, 0.8),
        (1.0, 1.0, 0.5),
    ];
    let mut out = Vec::new();
    for hi in [[1i64, 1], [2, 1]] {
        let dst = Site::new(&hi).expect("two coordinates");
        let region = Region::boxed(Site::origin(2), dst).expect("valid box");
        for &(a, b, p) in &laws {
            let spec = DistributionSpec::bernoulli(a, b, p).map_err(|e| IneqError::Parameters(e.to_string()))?;
            let c = fpp_exhaustive_check(&region, &Site::origin(2), &dst, &spec)?;
            let mut o = Outcome::new(
                c.es.margin.min(c.fs.margin),
                c.holds,
                format!("box={hi:?} bernoulli({a:?},{b:?},{p:?})"),
            );
            o.vacuous = c.fs.vacuous;
            out.push(o);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in std::iter::once(Suite::All).chain(Suite::CHECKS) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suite_holds_and_is_reproducible() {
        let a = run_suite(Suite::All, 7, 200).unwrap();
        assert_eq!(a.checks.len(), Suite::CHECKS.len());
        for c in &a.checks {
            assert!(c.holds, "{c:?}");
            assert!(c.min_margin >= -1e-9, "{c:?}");
        }
        let b = run_suite(Suite::All, 7, 200).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let fpp = &a.checks.iter().find(|c| c.check == Suite::FppExhaustive).unwrap();
        assert_eq!(fpp.instances, 10);
        assert_eq!(fpp.vacuous, 2);
    }
}
