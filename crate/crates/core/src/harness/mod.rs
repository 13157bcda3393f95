//! Experiment orchestration and persistence.
//!
//! An experiment turns a [`RunConfig`] into a [`Report`]: named CSV tables and
//! a map of pass/fail verdicts. [`execute`] runs one and writes
//! `manifest.json`, `data/*.csv` and `verdict.json` under
//! `<output.dir>/<experiment>/`.

mod experiments;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Build identifier recorded in every manifest.
pub const BUILD_ID: &str = env!("ZRP_BUILD_ID");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SteadyCheck,
    Simulate,
    FluctVerify,
    BgCheck,
    BoundaryScaling,
    Spectral,
    Hydro,
    ExtendedMartingale,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::SteadyCheck,
        Experiment::Simulate,
        Experiment::FluctVerify,
        Experiment::BgCheck,
        Experiment::BoundaryScaling,
        Experiment::Spectral,
        Experiment::Hydro,
        Experiment::ExtendedMartingale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SteadyCheck => "steady-check",
            Experiment::Simulate => "simulate",
            Experiment::FluctVerify => "fluct-verify",
            Experiment::BgCheck => "bg-check",
            Experiment::BoundaryScaling => "boundary-scaling",
            Experiment::Spectral => "spectral",
            Experiment::Hydro => "hydro",
            Experiment::ExtendedMartingale => "extended-martingale",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Measured quantity.
    pub value: f64,
    /// What it was compared against.
    pub target: f64,
    pub tolerance: f64,
    /// How `value`, `target` and `tolerance` combine into `pass`.
    pub rule: String,
}

impl Verdict {
    /// `|value - target| <= tol * |target|`.
    pub fn relative(value: f64, target: f64, tol: f64) -> Self {
        let pass = (value - target).abs() <= tol * target.abs();
        Self { pass, value, target, tolerance: tol, rule: "relative".into() }
    }

    /// `|value - target| <= tol`.
    pub fn absolute(value: f64, target: f64, tol: f64) -> Self {
        let pass = (value - target).abs() <= tol;
        Self { pass, value, target, tolerance: tol, rule: "absolute".into() }
    }

    /// `|mean - target| <= k se`.
    pub fn within_se(mean: f64, se: f64, target: f64, k: f64) -> Self {
        let pass = (mean - target).abs() <= k * se;
        Self { pass, value: mean, target, tolerance: k * se, rule: format!("within {k} standard errors") }
    }

    /// `value <= bound`.
    pub fn at_most(value: f64, bound: f64) -> Self {
        Self { pass: value <= bound, value, target: bound, tolerance: 0.0, rule: "at most".into() }
    }

    pub fn flag(pass: bool, rule: impl Into<String>) -> Self {
        Self { pass, value: pass as u8 as f64, target: 1.0, tolerance: 0.0, rule: rule.into() }
    }
}

/// A CSV table with a mandatory header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Columns of the per-statistic tables.
pub const STAT_COLUMNS: [&str; 7] = ["N", "theta", "H_id", "statistic", "value", "stderr", "M"];

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn stats(name: impl Into<String>) -> Self {
        Self::new(name, &STAT_COLUMNS)
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// One row of a statistics table; a missing standard error is left blank.
    #[allow(clippy::too_many_arguments)]
    pub fn push_stat(&mut self, n: usize, theta: f64, h: &str, statistic: &str, value: f64, stderr: Option<f64>, m: usize) {
        self.push(vec![n.to_string(), num(theta), h.to_string(), statistic.to_string(), num(value), stderr.map_or(String::new(), num), m.to_string()]);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| num(v)).collect());
    }
}

/// Shortest round-trip decimal text, switching to exponent form for very
/// large or small magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Metadata recorded in the manifest.
    pub notes: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    pub fn verdict(&mut self, name: impl Into<String>, v: Verdict) {
        self.verdicts.insert(name.into(), v);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.notes.insert(key.to_string(), v);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Runs an experiment without writing anything.
pub fn run_experiment(config: &RunConfig, experiment: Experiment) -> Result<Report> {
    experiments::run(config, experiment)
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: Experiment,
    config_hash: String,
    build_id: &'static str,
    seed: u64,
    wall_time_seconds: f64,
    config: &'a RunConfig,
    notes: &'a BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    experiment: Experiment,
    all_pass: bool,
    criteria: &'a BTreeMap<String, Verdict>,
}

/// Runs an experiment and writes its artifacts; returns the report and the
/// run directory.
pub fn execute(config: &RunConfig, experiment: Experiment) -> Result<(Report, PathBuf)> {
    let start = Instant::now();
    let report = run_experiment(config, experiment)?;
    let wall = start.elapsed().as_secs_f64();
    let dir = config.output.dir.join(experiment.name());
    write_artifacts(&dir, config, experiment, &report, wall)?;
    Ok((report, dir))
}

fn write_artifacts(dir: &Path, config: &RunConfig, experiment: Experiment, report: &Report, wall: f64) -> Result<()> {
    let data = dir.join("data");
    std::fs::create_dir_all(&data)?;
    for table in &report.tables {
        let mut w = csv::Writer::from_path(data.join(format!("{}.csv", table.name)))?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    let manifest = Manifest {
        experiment,
        config_hash: config.hash()?,
        build_id: BUILD_ID,
        seed: config.experiment.seed,
        wall_time_seconds: wall,
        config,
        notes: &report.notes,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    let verdicts = VerdictFile { experiment, all_pass: report.all_pass(), criteria: &report.verdicts };
    std::fs::write(dir.join("verdict.json"), serde_json::to_string_pretty(&verdicts)? + "\n")?;
    Ok(())
}
