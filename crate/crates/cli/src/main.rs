//! `fpplab`: run passage-percolation sweeps, fit exponents and verify the
//! inequality suite.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime
//! failure, 3 a verification found a violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use fpplab::config::{config_digest, load_config};
use fpplab::estimators::fit::fit_chi;
use fpplab::estimators::{run_sweep, Model, SweepConfig};
use fpplab::ineqlab::{run_suite, Suite};
use fpplab::report::{emit_report, variance_pairs, Summary};
use fpplab::store::{ResultStore, RunManifest, StoreError, MANIFEST_FILE};
use fpplab::DistributionSpec;

#[derive(Parser, Debug)]
#[command(name = "fpplab", version, about = "First- and last-passage percolation laboratory")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FPPLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point-to-point first passage on Z^d.
    Fpp {
        #[command(subcommand)]
        action: FppAction,
    },
    /// First passage on the torus.
    Torus {
        #[command(subcommand)]
        action: TorusAction,
    },
    /// Directed last passage on the square.
    Lpp {
        #[command(subcommand)]
        action: LppAction,
    },
    /// Exponent fits.
    Fit {
        #[command(subcommand)]
        action: FitAction,
    },
    /// Exact inequality checks.
    Ineq {
        #[command(subcommand)]
        action: IneqAction,
    },
    /// Regenerate summary, size table and plot manifest of a store.
    Report {
        #[arg(long)]
        store: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum FppAction {
    /// Sweep T(0, n e_1).
    Run(SweepArgs),
    /// Sweep with the averaged passage time F_n and compare variances.
    Fn(SweepArgs),
}

#[derive(Subcommand, Debug)]
enum TorusAction {
    /// Sweep the torus and map P(e in G).
    Influence(SweepArgs),
}

#[derive(Subcommand, Debug)]
enum LppAction {
    Run(SweepArgs),
}

#[derive(Subcommand, Debug)]
enum FitAction {
    /// Fit Var T_n ~ n^{2 chi} from a summary JSON.
    Chi {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum IneqAction {
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = fpplab::ineqlab::suite::DEFAULT_INSTANCES)]
        instances: usize,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    /// Configuration file; excludes the sweep flags below.
    #[arg(long, conflicts_with_all = ["d", "dist", "n", "replicas", "seed"])]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    /// Weight law, `name:param,...`.
    #[arg(long)]
    dist: Option<String>,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<i64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    max_grows: Option<u32>,
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    dyadic_bits: Option<u32>,
    /// Record the per-field Efron-Stein statistic.
    #[arg(long)]
    efron_stein: bool,
    /// Output directory (default: runs/<model>-<digest>-s<seed>).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    Violation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Violation(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("configuration error: {e:#}"),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
                Failure::Violation(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(config_err(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(runtime)?;
    }
    match cli.command {
        Command::Fpp {
            action: FppAction::Run(a),
        } => {
            let s = sweep(&a, Model::FppPoint, false)?;
            print_sizes(&s);
            Ok(())
        }
        Command::Fpp {
            action: FppAction::Fn(a),
        } => {
            let s = sweep(&a, Model::FppPoint, true)?;
            print_sizes(&s);
            if let Some(c) = &s.fn_comparison {
                println!("n\tvar_T\tvar_F\t|diff|/n^(3/4)\tci");
                for r in &c.rows {
                    println!(
                        "{}\t{:.6}\t{:.6}\t{:.6}\t[{:.6}, {:.6}]",
                        r.n, r.var_t, r.var_f, r.ratio, r.ratio_ci.0, r.ratio_ci.1
                    );
                }
                println!("no_growth={}", c.no_growth);
            }
            Ok(())
        }
        Command::Torus {
            action: TorusAction::Influence(a),
        } => {
            let s = sweep(&a, Model::FppTorus, false)?;
            print_sizes(&s);
            for m in &s.influence {
                println!(
                    "n={} E#G={:.4} max P(e in G)={:.5}",
                    m.n, m.expected_size, m.max_frequency
                );
                for ax in &m.axes {
                    println!(
                        "  axis {} chi2={:.3} df={} p={:.4} p_randomized={:.4}",
                        ax.axis, ax.chi_square, ax.df, ax.p_asymptotic, ax.p_randomized
                    );
                }
            }
            Ok(())
        }
        Command::Lpp {
            action: LppAction::Run(a),
        } => {
            let s = sweep(&a, Model::Lpp, false)?;
            print_sizes(&s);
            Ok(())
        }
        Command::Fit {
            action: FitAction::Chi { input },
        } => fit_from_file(&input),
        Command::Ineq {
            action:
                IneqAction::Verify {
                    suite,
                    seed,
                    instances,
                    out,
                },
        } => verify(&suite, seed, instances, out.as_deref()),
        Command::Report { store } => {
            let store = ResultStore::open(&store).map_err(store_failure)?;
            let (s, files) = emit_report(&store).map_err(runtime)?;
            print_sizes(&s);
            println!("wrote {}", files.summary.display());
            Ok(())
        }
    }
}

fn store_failure(e: StoreError) -> Failure {
    match e {
        StoreError::Config(_) | StoreError::ConfigMismatch(_) => config_err(e),
        other => runtime(other),
    }
}

fn build_config(a: &SweepArgs, model: Model, f_n: bool) -> Result<SweepConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let cfg = load_config(path).map_err(config_err)?;
            if cfg.model != model {
                return Err(config_err(anyhow!(
                    "{} describes a {} sweep, this command runs {model}",
                    path.display(),
                    cfg.model
                )));
            }
            cfg
        }
        None => {
            if a.n.is_empty() {
                return Err(config_err(anyhow!("--n is required without --config")));
            }
            let default_dist = match model {
                Model::FppPoint => "uniform:0,1",
                Model::FppTorus => "bernoulli:1,2,0.5",
                // geometric with mean 1
                Model::Lpp => "geometric:0.5",
            };
            let spec: DistributionSpec = a.dist.as_deref().unwrap_or(default_dist).parse().map_err(config_err)?;
            SweepConfig::new(
                model,
                a.d.unwrap_or(2),
                a.n.clone(),
                spec,
                a.replicas.unwrap_or(100),
                a.seed.unwrap_or(1),
            )
        }
    };
    if let Some(k) = a.kappa {
        cfg.window.kappa = k;
    }
    if let Some(g) = a.max_grows {
        cfg.window.max_grows = g;
    }
    if let Some(b) = a.bootstrap {
        if b == 0 {
            return Err(config_err(anyhow!("--bootstrap must be positive")));
        }
        cfg.bootstrap = b;
    }
    if let Some(j) = a.dyadic_bits {
        cfg.dyadic_bits = j;
    }
    cfg.stats.efron_stein |= a.efron_stein;
    cfg.stats.f_n |= f_n;
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn sweep(a: &SweepArgs, model: Model, f_n: bool) -> Result<Summary, Failure> {
    let cfg = build_config(a, model, f_n)?;
    let out = a.out.clone().unwrap_or_else(|| {
        PathBuf::from("runs").join(format!("{}-{}-s{}", cfg.model, &config_digest(&cfg)[..12], cfg.seed))
    });
    let store = ResultStore::create(&out, &cfg).map_err(store_failure)?;
    let started = SystemTime::now();
    log::info!(
        "sweeping {} sizes x {} replicas into {}",
        cfg.n_list.len(),
        cfg.replicas,
        out.display()
    );
    let records = run_sweep(&cfg, None).map_err(runtime)?;
    let files = match store.load() {
        Err(StoreError::Empty) => store.append(&records).map_err(runtime)?,
        Ok(existing) if existing == records => {
            log::info!("{} already holds these records", out.display());
            cfg.n_list.iter().map(|&n| store.records_path(n)).collect()
        }
        Ok(_) => {
            return Err(runtime(anyhow!(
                "{} already holds different records; choose another --out",
                out.display()
            )))
        }
        Err(e) => return Err(runtime(e)),
    };
    let (summary, report) = emit_report(&store).map_err(runtime)?;
    let mut listed = files;
    listed.extend([report.summary, report.sizes, report.plots]);
    let manifest = RunManifest::new(&cfg, started, SystemTime::now(), &records, &listed);
    store.write_json(MANIFEST_FILE, &manifest).map_err(runtime)?;
    println!("store: {}", out.display());
    Ok(summary)
}

fn print_sizes(s: &Summary) {
    println!("model={} d={} dist={} digest={}", s.model, s.dim, s.dist, s.digest);
    println!("n\tcount\tmean_T\tvar_T\tvar_ci\tvar/n");
    for z in &s.sizes {
        println!(
            "{}\t{}\t{:.6}\t{:.6}\t[{:.6}, {:.6}]\t{:.6}",
            z.n, z.count, z.t.mean, z.t.variance, z.t.variance_ci.0, z.t.variance_ci.1, z.var_over_n
        );
    }
    match (&s.fit, &s.fit_note) {
        (Some(f), _) => println!("chi={:.4} stderr={:.4}", f.chi_hat, f.chi_stderr),
        (None, Some(note)) => println!("chi: not fitted ({note})"),
        _ => {}
    }
}

fn fit_from_file(path: &Path) -> Outcome {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_err)?;
    let json: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(config_err)?;
    let pairs = variance_pairs(&json).map_err(config_err)?;
    let fit = fit_chi(&pairs).map_err(runtime)?;
    println!(
        "chi={} stderr={} sigma={} points={}",
        fit.chi_hat, fit.chi_stderr, fit.sigma_hat, fit.points
    );
    Ok(())
}

fn verify(suite: &str, seed: u64, instances: usize, out: Option<&Path>) -> Outcome {
    let suite: Suite = suite.parse().map_err(config_err)?;
    let report = run_suite(suite, seed, instances).map_err(runtime)?;
    for c in &report.checks {
        println!(
            "{}\t{}\t{} instances\t{} violations\tmin margin {:e}",
            if c.holds { "PASS" } else { "FAIL" },
            c.check,
            c.instances,
            c.violations,
            c.min_margin
        );
    }
    let json = serde_json::to_string_pretty(&report).map_err(runtime)? + "\n";
    match out {
        Some(p) => std::fs::write(p, json)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(runtime)?,
        None => log::debug!("{json}"),
    }
    if report.holds {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.check.to_string())
            .collect();
        Err(Failure::Violation(failed.join(", ")))
    }
}
