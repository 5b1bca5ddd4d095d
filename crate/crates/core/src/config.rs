//! Sweep configuration files.
//!
//! One `key = value` per line; `#` starts a comment. Every key may appear at
//! most once and unknown keys are errors.
//!
//! ```text
//! model = fpp-point        # fpp-point | fpp-torus | lpp
//! d = 2
//! n = 16, 32, 64
//! dist = uniform:0,1       # name:param,param,...
//! replicas = 1000
//! seed = 1
//! ```
//!
//! Optional keys and defaults: `kappa = 0.5`, `max_grows = 4`,
//! `bootstrap = 2000`, `dyadic_bits = 53`, `f_n = false`,
//! `efron_stein = false`, `es_resamples = 4`, `window_counts = true`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::estimators::{EstimatorError, Model, Statistics, SweepConfig};
use crate::fpp::WindowPolicy;
use crate::weights::{DistributionSpec, DEFAULT_DYADIC_BITS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error(transparent)]
    Invalid(#[from] EstimatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Model,
    D,
    N,
    Dist,
    Replicas,
    Seed,
    Kappa,
    MaxGrows,
    Bootstrap,
    DyadicBits,
    FN,
    EfronStein,
    EsResamples,
    WindowCounts,
}

const KEYS: [(Key, &str); 14] = [
    (Key::Model, "model"),
    (Key::D, "d"),
    (Key::N, "n"),
    (Key::Dist, "dist"),
    (Key::Replicas, "replicas"),
    (Key::Seed, "seed"),
    (Key::Kappa, "kappa"),
    (Key::MaxGrows, "max_grows"),
    (Key::Bootstrap, "bootstrap"),
    (Key::DyadicBits, "dyadic_bits"),
    (Key::FN, "f_n"),
    (Key::EfronStein, "efron_stein"),
    (Key::EsResamples, "es_resamples"),
    (Key::WindowCounts, "window_counts"),
];

impl Key {
    fn name(self) -> &'static str {
        KEYS.iter()
            .find(|(k, _)| *k == self)
            .map(|(_, s)| *s)
            .expect("every key is listed")
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn value<T: FromStr>(key: Key, e: &Entry) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    e.value.parse().map_err(|err: T::Err| ConfigError::Syntax {
        line: e.line,
        message: format!("{}: cannot parse {:?}: {err}", key.name(), e.value),
    })
}

fn boolean(key: Key, e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(ConfigError::Syntax {
            line: e.line,
            message: format!("{}: expected true or false, got {other:?}", key.name()),
        }),
    }
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut entries: BTreeMap<Key, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax { line, message };
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected 'key = value', got {body:?}")))?;
        let name = k.trim();
        let key = KEYS
            .iter()
            .find(|(_, s)| *s == name)
            .map(|(k, _)| *k)
            .ok_or_else(|| syntax(format!("unknown key '{name}'")))?;
        let value = v.trim().to_string();
        if value.is_empty() {
            return Err(syntax(format!("{name}: empty value")));
        }
        if let Some(prev) = entries.insert(key, Entry { line, value }) {
            return Err(syntax(format!("{name} already set on line {}", prev.line)));
        }
    }
    let need = |k: Key| entries.get(&k).ok_or(ConfigError::Missing(k.name()));
    let model: Model = value(Key::Model, need(Key::Model)?)?;
    let n_entry = need(Key::N)?;
    let n_list = n_entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse::<i64>().map_err(|e| ConfigError::Syntax {
                line: n_entry.line,
                message: format!("n: cannot parse {:?}: {e}", s.trim()),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec: DistributionSpec = value(Key::Dist, need(Key::Dist)?)?;
    let mut cfg = SweepConfig::new(
        model,
        entries.get(&Key::D).map_or(Ok(2), |e| value(Key::D, e))?,
        n_list,
        spec,
        value(Key::Replicas, need(Key::Replicas)?)?,
        value(Key::Seed, need(Key::Seed)?)?,
    );
    let defaults = WindowPolicy::default();
    let stats = Statistics::default();
    let opt = |k: Key| entries.get(&k);
    cfg.window = WindowPolicy {
        kappa: opt(Key::Kappa).map_or(Ok(defaults.kappa), |e| value(Key::Kappa, e))?,
        max_grows: opt(Key::MaxGrows).map_or(Ok(defaults.max_grows), |e| value(Key::MaxGrows, e))?,
    };
    cfg.bootstrap = opt(Key::Bootstrap).map_or(Ok(cfg.bootstrap), |e| value(Key::Bootstrap, e))?;
    cfg.dyadic_bits = opt(Key::DyadicBits).map_or(Ok(DEFAULT_DYADIC_BITS), |e| value(Key::DyadicBits, e))?;
    cfg.stats = Statistics {
        f_n: opt(Key::FN).map_or(Ok(stats.f_n), |e| boolean(Key::FN, e))?,
        efron_stein: opt(Key::EfronStein).map_or(Ok(stats.efron_stein), |e| boolean(Key::EfronStein, e))?,
        es_resamples: opt(Key::EsResamples).map_or(Ok(stats.es_resamples), |e| value(Key::EsResamples, e))?,
        window_counts: opt(Key::WindowCounts).map_or(Ok(stats.window_counts), |e| boolean(Key::WindowCounts, e))?,
    };
    if cfg.bootstrap == 0 {
        return Err(EstimatorError::Config("bootstrap must be positive".into()).into());
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SweepConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Every key, in a fixed order; `parse_config` inverts this exactly.
pub fn serialize_config(cfg: &SweepConfig) -> String {
    let mut out = semantic_lines(cfg);
    out.insert(5, format!("seed = {}", cfg.seed));
    out.join("\n") + "\n"
}

fn semantic_lines(cfg: &SweepConfig) -> Vec<String> {
    let ns: Vec<String> = cfg.n_list.iter().map(|n| n.to_string()).collect();
    vec![
        format!("model = {}", cfg.model),
        format!("d = {}", cfg.dim),
        format!("n = {}", ns.join(", ")),
        format!("dist = {}", cfg.spec),
        format!("replicas = {}", cfg.replicas),
        format!("kappa = {}", cfg.window.kappa),
        format!("max_grows = {}", cfg.window.max_grows),
        format!("bootstrap = {}", cfg.bootstrap),
        format!("dyadic_bits = {}", cfg.dyadic_bits),
        format!("f_n = {}", cfg.stats.f_n),
        format!("efron_stein = {}", cfg.stats.efron_stein),
        format!("es_resamples = {}", cfg.stats.es_resamples),
        format!("window_counts = {}", cfg.stats.window_counts),
    ]
}

/// SHA-256 over every field except the seed, in hex.
pub fn config_digest(cfg: &SweepConfig) -> String {
    let text = semantic_lines(cfg).join("\n");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Law;
    use proptest::prelude::*;

    const MINIMAL: &str = "model = fpp-point\nn = 8, 16\ndist = uniform:0,1\nreplicas = 10\nseed = 3\n";

    #[test]
    fn defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.window.kappa, 0.5);
        assert_eq!(c.bootstrap, 2000);
        assert_eq!(c.dyadic_bits, 53);
        assert_eq!(c.dim, 2);
        assert_eq!(c.n_list, vec![8, 16]);
    }

    #[test]
    fn bernoulli_grammar() {
        let c = parse_config(&MINIMAL.replace("uniform:0,1", "bernoulli:1,2,0.5")).unwrap();
        assert_eq!(*c.spec.law(), Law::Bernoulli { a: 1.0, b: 2.0, p: 0.5 });
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = parse_config(&format!("{MINIMAL}replcias = 4\n"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("replcias") && e.contains("line 6"), "{e}");
        let e = parse_config("# comment\nmodel = lpp\nn = x\n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = parse_config(&format!("{MINIMAL}seed = 4\n")).unwrap_err().to_string();
        assert!(e.contains("already set"), "{e}");
        assert!(matches!(
            parse_config("model = lpp\n").unwrap_err(),
            ConfigError::Missing("n")
        ));
        // atom at zero with mass above the planar threshold
        let e = parse_config(&MINIMAL.replace("uniform:0,1", "bernoulli:0,1,0.4")).unwrap_err();
        assert!(matches!(e, ConfigError::Invalid(_)), "{e}");
    }

    #[test]
    fn digest_ignores_seed_only() {
        let a = parse_config(MINIMAL).unwrap();
        let mut b = a.clone();
        b.seed = 99;
        assert_eq!(config_digest(&a), config_digest(&b));
        b.replicas = 11;
        assert_ne!(config_digest(&a), config_digest(&b));
    }

    fn spec() -> impl Strategy<Value = DistributionSpec> {
        prop_oneof![
            (0.1f64..5.0, 0.0f64..5.0, 0.01f64..0.49)
                .prop_map(|(a, w, p)| DistributionSpec::bernoulli(a, a + w, p).unwrap()),
            (0.0f64..2.0, 0.01f64..3.0).prop_map(|(lo, w)| DistributionSpec::uniform(lo, lo + w).unwrap()),
            (0.01f64..10.0).prop_map(|r| DistributionSpec::exponential(r).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(
            spec in spec(),
            model in prop_oneof![Just(Model::FppPoint), Just(Model::FppTorus)],
            dim in 2usize..=4,
            start in 2i64..20,
            steps in proptest::collection::vec(1i64..50, 0..4),
            replicas in 2u64..100_000,
            seed in any::<u64>(),
            kappa in 0.0f64..3.0,
            grows in 0u32..8,
            bootstrap in 1usize..5000,
            bits in 1u32..=64,
            flags in any::<(bool, bool, bool)>(),
            es in 1u32..16,
        ) {
            let mut n_list = vec![start];
            for s in steps {
                n_list.push(n_list.last().unwrap() + s);
            }
            let mut cfg = SweepConfig::new(model, dim, n_list, spec, replicas, seed);
            cfg.window = WindowPolicy { kappa, max_grows: grows };
            cfg.bootstrap = bootstrap;
            cfg.dyadic_bits = bits;
            cfg.stats = Statistics { f_n: flags.0, efron_stein: flags.1, es_resamples: es, window_counts: flags.2 };
            prop_assume!(cfg.validate().is_ok());
            prop_assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
        }
    }
}
