//! On-disk result store.
//!
//! ```text
//! <root>/config.txt                 the sweep configuration
//! <root>/records/<model>_n<n>.csv   one file per size, append-only
//! <root>/summary.json, sizes.csv, plots.txt
//! <root>/manifest.json              digest, seed, version, timestamps
//! ```
//!
//! Data files never contain timestamps, so equal configurations and seeds
//! give byte-identical records.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{config_digest, load_config, serialize_config, ConfigError};
use crate::estimators::{CsvRecord, EstimatorError, Model, Records, SweepConfig};

pub const CONFIG_FILE: &str = "config.txt";
pub const RECORDS_DIR: &str = "records";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Record {
        path: String,
        #[source]
        source: EstimatorError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("store at {0} holds a different configuration")]
    ConfigMismatch(String),
    #[error("{path}: header does not match the {model} schema")]
    Header { path: String, model: Model },
    #[error("n = {n}, replica {replica} is already stored")]
    Duplicate { n: i64, replica: u64 },
    #[error("n = {0} is not in the configured size list")]
    UnknownSize(i64),
    #[error("records are for {got}, store is for {expected}")]
    WrongModel { expected: Model, got: Model },
    #[error("store has no records")]
    Empty,
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct ResultStore {
    root: PathBuf,
    config: SweepConfig,
}

impl ResultStore {
    /// Open or initialise a store for `config`. An existing store must hold
    /// the same configuration.
    pub fn create(root: impl AsRef<Path>, config: &SweepConfig) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        let records = root.join(RECORDS_DIR);
        fs::create_dir_all(&records).map_err(io(&records))?;
        let path = root.join(CONFIG_FILE);
        if path.exists() {
            if load_config(&path)? != *config {
                return Err(StoreError::ConfigMismatch(root.display().to_string()));
            }
        } else {
            fs::write(&path, serialize_config(config)).map_err(io(&path))?;
        }
        Ok(ResultStore {
            root,
            config: config.clone(),
        })
    }

    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        let config = load_config(root.join(CONFIG_FILE))?;
        Ok(ResultStore { root, config })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    pub fn records_path(&self, n: i64) -> PathBuf {
        self.root
            .join(RECORDS_DIR)
            .join(format!("{}_n{n}.csv", self.config.model))
    }

    /// Append records, creating per-size files with their header row.
    /// Returns the files written, in size order.
    pub fn append(&self, records: &Records) -> Result<Vec<PathBuf>, StoreError> {
        let got = match records {
            Records::Fpp(_) => Model::FppPoint,
            Records::Torus(_) => Model::FppTorus,
            Records::Lpp(_) => Model::Lpp,
        };
        if got != self.config.model {
            return Err(StoreError::WrongModel {
                expected: self.config.model,
                got,
            });
        }
        match records {
            Records::Fpp(v) => self.append_rows(v, |r| (r.n, r.replica)),
            Records::Torus(v) => self.append_rows(v, |r| (r.n, r.replica)),
            Records::Lpp(v) => self.append_rows(v, |r| (r.n, r.replica)),
        }
    }

    fn append_rows<R: CsvRecord>(
        &self,
        rows: &[R],
        key: impl Fn(&R) -> (i64, u64),
    ) -> Result<Vec<PathBuf>, StoreError> {
        let mut by_n: BTreeMap<i64, Vec<&R>> = BTreeMap::new();
        for r in rows {
            let (n, _) = key(r);
            if !self.config.n_list.contains(&n) {
                return Err(StoreError::UnknownSize(n));
            }
            by_n.entry(n).or_default().push(r);
        }
        let mut written = Vec::new();
        for (n, rows) in by_n {
            let path = self.records_path(n);
            let mut seen: BTreeSet<u64> = if path.exists() {
                self.read_rows::<R>(&path)?.iter().map(|r| key(r).1).collect()
            } else {
                BTreeSet::new()
            };
            for r in &rows {
                let replica = key(r).1;
                if !seen.insert(replica) {
                    return Err(StoreError::Duplicate { n, replica });
                }
            }
            let fresh = !path.exists() || fs::metadata(&path).map_err(io(&path))?.len() == 0;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(io(&path))?;
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(file);
            let csv_err = |source| StoreError::Csv {
                path: path.display().to_string(),
                source,
            };
            if fresh {
                w.write_record(R::HEADER).map_err(csv_err)?;
            }
            for r in rows {
                w.write_record(r.to_fields()).map_err(csv_err)?;
            }
            w.flush().map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }

    fn read_rows<R: CsvRecord>(&self, path: &Path) -> Result<Vec<R>, StoreError> {
        let csv_err = |source| StoreError::Csv {
            path: path.display().to_string(),
            source,
        };
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(csv_err)?;
        let header = rd.headers().map_err(csv_err)?.clone();
        if !header.iter().eq(R::HEADER.iter().copied()) {
            return Err(StoreError::Header {
                path: path.display().to_string(),
                model: self.config.model,
            });
        }
        let mut out = Vec::new();
        for row in rd.records() {
            let row = row.map_err(csv_err)?;
            let fields: Vec<&str> = row.iter().collect();
            out.push(R::from_fields(&fields).map_err(|source| StoreError::Record {
                path: path.display().to_string(),
                source,
            })?);
        }
        Ok(out)
    }

    /// Every stored record, by size in configured order.
    pub fn load(&self) -> Result<Records, StoreError> {
        let paths: Vec<PathBuf> = self
            .config
            .n_list
            .iter()
            .map(|&n| self.records_path(n))
            .filter(|p| p.exists())
            .collect();
        let records = match self.config.model {
            Model::FppPoint => Records::Fpp(self.read_all(&paths)?),
            Model::FppTorus => Records::Torus(self.read_all(&paths)?),
            Model::Lpp => Records::Lpp(self.read_all(&paths)?),
        };
        if records.is_empty() {
            return Err(StoreError::Empty);
        }
        Ok(records)
    }

    fn read_all<R: CsvRecord>(&self, paths: &[PathBuf]) -> Result<Vec<R>, StoreError> {
        let mut out = Vec::new();
        for p in paths {
            out.extend(self.read_rows::<R>(p)?);
        }
        Ok(out)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, StoreError> {
        let path = self.root.join(name);
        fs::write(&path, text).map_err(io(&path))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, StoreError> {
        let path = self.root.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|source| StoreError::Json {
            path: path.display().to_string(),
            source,
        })?;
        text.push('\n');
        let mut f = fs::File::create(&path).map_err(io(&path))?;
        f.write_all(text.as_bytes()).map_err(io(&path))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the configuration without its seed.
    pub digest: String,
    pub seed: u64,
    pub version: String,
    /// RFC 3339, UTC.
    pub started: String,
    pub finished: String,
    /// Records per size.
    pub counts: BTreeMap<i64, usize>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(
        config: &SweepConfig,
        started: SystemTime,
        finished: SystemTime,
        records: &Records,
        files: &[PathBuf],
    ) -> Self {
        let counts = records
            .sizes()
            .into_iter()
            .map(|n| (n, records.times(n).len()))
            .collect();
        RunManifest {
            digest: config_digest(config),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: humantime::format_rfc3339_seconds(started).to_string(),
            finished: humantime::format_rfc3339_seconds(finished).to_string(),
            counts,
            files: files.iter().map(|p| p.display().to_string()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::LppRecord;
    use crate::weights::DistributionSpec;

    fn cfg() -> SweepConfig {
        SweepConfig::new(
            Model::Lpp,
            2,
            vec![4, 8],
            DistributionSpec::geometric(0.5).unwrap(),
            3,
            1,
        )
    }

    fn lpp(n: i64, replica: u64, t: f64) -> LppRecord {
        LppRecord { n, replica, t }
    }

    #[test]
    fn append_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::create(dir.path(), &cfg()).unwrap();
        let first = Records::Lpp(vec![lpp(4, 0, 1.5), lpp(8, 0, 7.0)]);
        let files = store.append(&first).unwrap();
        assert_eq!(files.len(), 2);
        store.append(&Records::Lpp(vec![lpp(4, 1, 2.25)])).unwrap();
        let text = fs::read_to_string(store.records_path(4)).unwrap();
        assert_eq!(text, "n,replica,T\n4,0,1.5\n4,1,2.25\n");
        let reopened = ResultStore::open(dir.path()).unwrap();
        assert_eq!(
            reopened.load().unwrap(),
            Records::Lpp(vec![lpp(4, 0, 1.5), lpp(4, 1, 2.25), lpp(8, 0, 7.0)])
        );
    }

    #[test]
    fn refuses_duplicates_foreign_sizes_and_configs() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::create(dir.path(), &cfg()).unwrap();
        assert!(matches!(store.load(), Err(StoreError::Empty)));
        store.append(&Records::Lpp(vec![lpp(4, 0, 1.0)])).unwrap();
        assert!(matches!(
            store.append(&Records::Lpp(vec![lpp(4, 0, 1.0)])),
            Err(StoreError::Duplicate { n: 4, replica: 0 })
        ));
        assert!(matches!(
            store.append(&Records::Lpp(vec![lpp(5, 0, 1.0)])),
            Err(StoreError::UnknownSize(5))
        ));
        let mut other = cfg();
        other.replicas = 4;
        assert!(matches!(
            ResultStore::create(dir.path(), &other),
            Err(StoreError::ConfigMismatch(_))
        ));
    }

    #[test]
    fn bad_header_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::create(dir.path(), &cfg()).unwrap();
        fs::write(store.records_path(4), "n,rep,T\n4,0,1\n").unwrap();
        assert!(matches!(store.load(), Err(StoreError::Header { .. })));
    }

    #[test]
    fn manifest_fields() {
        let c = cfg();
        let recs = Records::Lpp(vec![lpp(4, 0, 1.0), lpp(4, 1, 2.0), lpp(8, 0, 3.0)]);
        let t = SystemTime::UNIX_EPOCH;
        let m = RunManifest::new(&c, t, t, &recs, &[PathBuf::from("a.csv")]);
        assert_eq!(m.started, "1970-01-01T00:00:00Z");
        assert_eq!(m.counts, BTreeMap::from([(4, 2), (8, 1)]));
        assert_eq!(m.digest, config_digest(&c));
        assert_eq!(m.digest.len(), 64);
    }
}
