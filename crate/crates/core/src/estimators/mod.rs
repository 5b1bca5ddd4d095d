//! Monte Carlo sweeps and the statistics computed from their records.
//!
//! [`run_sweep`] turns a [`SweepConfig`] into [`Records`]; every other
//! function here is a pure reduction of records (or of synthetic inputs).

use thiserror::Error;

use crate::fpp::FppError;
use crate::lpp::LppError;
use crate::weights::WeightsError;

pub mod bootstrap;
pub mod compare;
pub mod efron_stein;
pub mod fit;
pub mod geometry;
pub mod influence;
pub mod records;
pub mod sweep;
pub mod tail;

pub use bootstrap::{summarize, EstimatorSummary, DEFAULT_RESAMPLES};
pub use compare::{compare_fn_variance, FnComparison};
pub use efron_stein::{efron_stein_bound, efron_stein_summary, EsMode, EsSummary};
pub use fit::{fit_chi, sublinearity_profile, FitResult, SublinearityProfile};
pub use geometry::{animal_weight_stats, g_linearity, geodesic_speed_stats, geodesic_window_stats};
pub use influence::{influence_map, InfluenceMap};
pub use records::{CsvRecord, FppRecord, LppRecord, Records, TorusRecord, WINDOW_RADII};
pub use sweep::{run_sweep, Model, Statistics, SweepConfig};
pub use tail::{tail_profile, TailProfile};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("column {column}: cannot parse {value:?}: {reason}")]
    Parse {
        column: String,
        value: String,
        reason: String,
    },
    #[error("record schema: {0}")]
    Schema(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("variance at n = {n} is {value}, must be positive")]
    NonPositiveVariance { n: f64, value: f64 },
    #[error("need at least {needed} replicas, got {got}")]
    TooFewReplicas { needed: usize, got: usize },
    #[error("no records")]
    Empty,
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fpp(#[from] FppError),
    #[error(transparent)]
    Lpp(#[from] LppError),
    #[error(transparent)]
    Weights(#[from] WeightsError),
}
