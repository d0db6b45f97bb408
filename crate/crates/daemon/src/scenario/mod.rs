//! Synthetic-cluster case studies. Each run writes a set of CSV files and a
//! `<case>_summary.csv` of `metric,value` rows into the output directory.

pub mod clustering;
pub mod jobs;
pub mod overhead;
pub mod power;
pub mod signals;
pub mod sim;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("daemon failure: {0}")]
    Daemon(String),
    #[error("plugin {plugin}: {message}")]
    Plugin { plugin: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Power,
    Jobs,
    Clustering,
    Overhead,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::Power, Case::Jobs, Case::Clustering, Case::Overhead];

    pub fn as_str(self) -> &'static str {
        match self {
            Case::Power => "power",
            Case::Jobs => "jobs",
            Case::Clustering => "clustering",
            Case::Overhead => "overhead",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Case::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown case {s:?} (expected power, jobs, clustering or overhead)"))
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub seed: u64,
    pub out: PathBuf,
    /// Simulated duration; each case has its own default.
    pub duration_s: Option<u64>,
    /// Wall-clock length of the overhead measurement.
    pub steady_s: u64,
}

impl Options {
    pub fn new(seed: u64, out: impl Into<PathBuf>) -> Self {
        Options {
            seed,
            out: out.into(),
            duration_s: None,
            steady_s: 30,
        }
    }
}

/// Files written by a run and its headline metrics.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn metric(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn metric_f64(&self, key: &str) -> Option<f64> {
        self.metric(key)?.parse().ok()
    }

    fn add(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    fn write_rows<T: Serialize>(&mut self, dir: &Path, name: &str, rows: &[T]) -> Result<(), ScenarioError> {
        let path = dir.join(name);
        write_csv(&path, rows)?;
        self.files.push(path);
        Ok(())
    }

    fn write_summary(&mut self, dir: &Path, case: Case) -> Result<(), ScenarioError> {
        #[derive(Serialize)]
        struct Row<'a> {
            metric: &'a str,
            value: &'a str,
        }
        let rows: Vec<Row> = self
            .summary
            .iter()
            .map(|(k, v)| Row { metric: k, value: v })
            .collect();
        let path = dir.join(format!("{case}_summary.csv"));
        write_csv(&path, &rows)?;
        self.files.push(path);
        Ok(())
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), ScenarioError> {
    let err = |e: &dyn fmt::Display| ScenarioError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| err(&e))?;
    for r in rows {
        w.serialize(r).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))
}

fn prepare(out: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(out).map_err(|e| ScenarioError::Output {
        path: out.to_path_buf(),
        message: e.to_string(),
    })
}

fn scratch() -> Result<tempfile::TempDir, ScenarioError> {
    tempfile::Builder::new()
        .prefix("odaframe-store")
        .tempdir()
        .map_err(|e| ScenarioError::Daemon(format!("scratch store: {e}")))
}

/// Runs one case study.
pub fn run(case: Case, opts: &Options) -> Result<Report, ScenarioError> {
    prepare(&opts.out)?;
    match case {
        Case::Power => power::run(opts).map(|r| r.report),
        Case::Jobs => jobs::run(opts).map(|r| r.report),
        Case::Clustering => clustering::run(opts).map(|r| r.report),
        Case::Overhead => overhead::run(opts),
    }
}

/// Rounds to three decimals for stable CSV output.
fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}
