//! Summaries and plot manifests, computed from stored records alone.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::config::config_digest;
use crate::estimators::bootstrap::summarize;
use crate::estimators::efron_stein::efron_stein_summary;
use crate::estimators::fit::fit_chi_with_means;
use crate::estimators::geometry::{AnimalStats, ScaleCheck, SpeedStats, WindowStats};
use crate::estimators::influence::DEFAULT_RANDOMIZATIONS;
use crate::estimators::records::fmt_f64;
use crate::estimators::tail::MIN_REPLICAS;
use crate::estimators::{
    animal_weight_stats, compare_fn_variance, g_linearity, geodesic_speed_stats, geodesic_window_stats, influence_map,
    sublinearity_profile, tail_profile, EsSummary, EstimatorError, EstimatorSummary, FitResult, FnComparison,
    FppRecord, InfluenceMap, Model, Records, SublinearityProfile, SweepConfig, TailProfile,
};
use crate::rng::mix64;
use crate::store::{ResultStore, StoreError};

pub const SUMMARY_FILE: &str = "summary.json";
pub const SIZES_FILE: &str = "sizes.csv";
pub const PLOTS_FILE: &str = "plots.txt";

const SIZE_TAG: u64 = 0x5349_5a45_0000_0000;
const ES_TAG: u64 = 0x4553_0000_0000_0000;
const FN_TAG: u64 = 0x464e_0000_0000_0000;
const INFLUENCE_TAG: u64 = 0x494e_0000_0000_0000;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: i64,
    pub count: usize,
    /// Replicas whose window reached its growth limit.
    pub overflow: usize,
    pub t: EstimatorSummary,
    pub mean_over_n: f64,
    pub var_over_n: f64,
    pub f_n: Option<EstimatorSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub g_linearity: ScaleCheck,
    pub windows: Option<WindowStats>,
    pub animal: AnimalStats,
    pub speed: SpeedStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub model: String,
    pub dim: usize,
    pub dist: String,
    pub replicas: u64,
    pub seed: u64,
    pub digest: String,
    pub bootstrap: usize,
    pub sizes: Vec<SizeSummary>,
    pub fit: Option<FitResult>,
    /// Why `fit` is absent.
    pub fit_note: Option<String>,
    pub sublinearity: Option<SublinearityProfile>,
    pub efron_stein: Vec<EsSummary>,
    pub fn_comparison: Option<FnComparison>,
    pub geometry: Option<GeometrySummary>,
    pub influence: Vec<InfluenceMap>,
    pub tails: Vec<TailProfile>,
}

fn fpp_at(v: &[FppRecord], n: i64) -> Vec<FppRecord> {
    v.iter().filter(|r| r.n == n).cloned().collect()
}

/// Every statistic the records support. Deterministic in `(cfg, records)`.
pub fn build_summary(cfg: &SweepConfig, records: &Records) -> Result<Summary, EstimatorError> {
    if records.is_empty() {
        return Err(EstimatorError::Empty);
    }
    let resamples = cfg.bootstrap;
    let mut sizes = Vec::new();
    for n in records.sizes() {
        let times = records.times(n);
        if times.len() < 2 {
            return Err(EstimatorError::TooFewReplicas {
                needed: 2,
                got: times.len(),
            });
        }
        let t = summarize(&times, resamples, mix64(cfg.seed, SIZE_TAG | n as u64));
        let (overflow, f_n) = match records {
            Records::Fpp(v) => {
                let at = fpp_at(v, n);
                let fs: Option<Vec<f64>> = at.iter().map(|r| r.f_n).collect();
                let f_n = fs.map(|fs| summarize(&fs, resamples, mix64(cfg.seed, FN_TAG | n as u64)));
                (at.iter().filter(|r| r.overflow).count(), f_n)
            }
            Records::Torus(v) => (v.iter().filter(|r| r.n == n && r.overflow).count(), None),
            Records::Lpp(_) => (0, None),
        };
        sizes.push(SizeSummary {
            n,
            count: times.len(),
            overflow,
            mean_over_n: t.mean / n as f64,
            var_over_n: t.variance / n as f64,
            t,
            f_n,
        });
    }
    let pairs: Vec<(f64, f64)> = sizes.iter().map(|s| (s.n as f64, s.t.variance)).collect();
    let means: Vec<(f64, f64)> = sizes.iter().map(|s| (s.n as f64, s.t.mean)).collect();
    let (fit, fit_note) = match fit_chi_with_means(&pairs, &means) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let profile_input: Vec<(f64, EstimatorSummary)> = sizes.iter().map(|s| (s.n as f64, s.t.clone())).collect();
    let sublinearity = sublinearity_profile(&profile_input).ok();
    let mut efron_stein = Vec::new();
    let mut fn_comparison = None;
    let mut geometry = None;
    let mut influence = Vec::new();
    match records {
        Records::Fpp(v) => {
            for s in &sizes {
                let seed = mix64(cfg.seed, ES_TAG | s.n as u64);
                if let Some(es) = efron_stein_summary(v, s.n, &cfg.spec, resamples, seed) {
                    efron_stein.push(es);
                }
            }
            if v.iter().all(|r| r.f_n.is_some()) {
                fn_comparison = Some(compare_fn_variance(v, resamples, mix64(cfg.seed, FN_TAG))?);
            }
            geometry = Some(GeometrySummary {
                g_linearity: g_linearity(v),
                windows: geodesic_window_stats(v),
                animal: animal_weight_stats(v),
                speed: geodesic_speed_stats(v),
            });
        }
        Records::Torus(v) => {
            for s in &sizes {
                let seed = mix64(cfg.seed, INFLUENCE_TAG | s.n as u64);
                influence.push(influence_map(v, cfg.dim, s.n, DEFAULT_RANDOMIZATIONS, seed)?);
            }
        }
        Records::Lpp(_) => {}
    }
    let tails = sizes
        .iter()
        .filter(|s| s.count >= MIN_REPLICAS)
        .map(|s| tail_profile(&records.times(s.n), s.n as f64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Summary {
        model: cfg.model.to_string(),
        dim: cfg.dim,
        dist: cfg.spec.to_string(),
        replicas: cfg.replicas,
        seed: cfg.seed,
        digest: config_digest(cfg),
        bootstrap: resamples,
        sizes,
        fit,
        fit_note,
        sublinearity,
        efron_stein,
        fn_comparison,
        geometry,
        influence,
        tails,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One row per size, the data behind the plot manifest.
pub fn sizes_csv(summary: &Summary) -> String {
    let mut out = String::from("n,count,mean_T,var_T,var_lo,var_hi,mean_over_n,var_over_n,var_F,g_int_over_n\n");
    let g = |n: i64| {
        summary
            .geometry
            .as_ref()
            .and_then(|g| g.g_linearity.per_n.iter().find(|p| p.0 == n).map(|p| p.1))
    };
    for s in &summary.sizes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.n,
            s.count,
            fmt_f64(s.t.mean),
            fmt_f64(s.t.variance),
            fmt_f64(s.t.variance_ci.0),
            fmt_f64(s.t.variance_ci.1),
            fmt_f64(s.mean_over_n),
            fmt_f64(s.var_over_n),
            opt(s.f_n.as_ref().map(|f| f.variance)),
            opt(g(s.n)),
        );
    }
    out
}

/// Tab-separated `path x y scale reference` lines for an external plotter.
pub fn plot_manifest(summary: &Summary) -> String {
    let mut out = String::from("# path\tx\ty\tscale\treference\n");
    let mut line = |y: &str, scale: &str, reference: &str| {
        let _ = writeln!(out, "{SIZES_FILE}\tn\t{y}\t{scale}\t{reference}");
    };
    line("var_T", "loglog", "c*n^(2/3)");
    line("var_T", "loglog", "c*n");
    if summary.model != Model::Lpp.name() {
        line("var_T", "loglog", "c*n/log(n)");
        line("var_over_n", "logx", "c/log(n)");
    }
    line("mean_over_n", "logx", "mu");
    if summary.sizes.iter().any(|s| s.f_n.is_some()) {
        line("var_F", "loglog", "c*n");
    }
    if summary.geometry.is_some() {
        line("g_int_over_n", "logx", "c");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub sizes: PathBuf,
    pub plots: PathBuf,
}

/// Recompute and write the summary, size table and plot manifest.
pub fn emit_report(store: &ResultStore) -> Result<(Summary, ReportFiles), ReportError> {
    let records = store.load()?;
    let summary = build_summary(store.config(), &records)?;
    let files = ReportFiles {
        summary: store.write_json(SUMMARY_FILE, &summary)?,
        sizes: store.write_text(SIZES_FILE, &sizes_csv(&summary))?,
        plots: store.write_text(PLOTS_FILE, &plot_manifest(&summary))?,
    };
    Ok((summary, files))
}

/// `(n, Var T_n)` from a summary JSON: `sizes[i].n` with `sizes[i].t.variance`
/// or, in hand-written inputs, `sizes[i].variance`.
pub fn variance_pairs(summary: &serde_json::Value) -> Result<Vec<(f64, f64)>, EstimatorError> {
    let bad = |m: String| EstimatorError::Schema(m);
    let sizes = summary
        .get("sizes")
        .and_then(|s| s.as_array())
        .ok_or_else(|| bad("expected a 'sizes' array".into()))?;
    sizes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let n = s.get("n").and_then(|v| v.as_f64());
            let var = s
                .get("t")
                .and_then(|t| t.get("variance"))
                .or_else(|| s.get("variance"))
                .and_then(|v| v.as_f64());
            match (n, var) {
                (Some(n), Some(v)) => Ok((n, v)),
                _ => Err(bad(format!("sizes[{i}] needs numeric n and variance"))),
            }
        })
        .collect()
}
