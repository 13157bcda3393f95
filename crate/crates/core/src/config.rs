//! Run configuration: a TOML file with `[model]`, `[experiment]`, `[output]`
//! and optional `[tolerances]` sections, plus `section.key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::JumpRate;
use crate::steady::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    pub theta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    /// `constant`, `linear`, `alternating` or `table:<path>`.
    #[serde(default = "default_rate")]
    pub rate: String,
    #[serde(default = "one")]
    pub rate_scale: f64,
}

fn default_rate() -> String {
    "constant".into()
}

fn one() -> f64 {
    1.0
}

impl ModelSection {
    pub fn rate(&self) -> Result<JumpRate> {
        JumpRate::from_name(&self.rate, self.rate_scale)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.theta, (self.alpha, self.lambda, self.beta, self.delta), Arc::new(self.rate()?))
    }
}

/// Experiment settings. Unset fields take per-experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ladder: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_dt: Option<f64>,
    /// TOML integers are signed, so seeds are limited to `0..=i64::MAX`.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of test functions in the battery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<usize>,
    /// Sturm–Liouville grid size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    /// Boundary box width for local statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Lags for the stationary covariance check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<Vec<f64>>,
    /// Grid size for the hydrodynamic solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydro_grid: Option<usize>,
}

fn default_seed() -> u64 {
    20_240_601
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Overrides of named verdict tolerances.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Canonical JSON: keys sorted, floats in shortest round-trip decimal form.
    pub fn canonical_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&v)?)
    }

    /// FNV-1a 64 of the canonical JSON, as 16 hex digits.
    pub fn hash(&self) -> Result<String> {
        let bytes = self.canonical_json()?;
        let h = bytes.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        Ok(format!("{h:016x}"))
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

/// `section.key=value`, where the value is parsed as a TOML value and falls
/// back to a plain string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override key `{path}` must be section.key")))?;
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(Error::Config(format!("`{section}` is not a section"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BASE: &str = r#"
[model]
n = 64
theta = 1.0
alpha = 1.0
lambda = 2.0
beta = 0.5
delta = 2.0

[experiment]
trajectories = 100
horizon = 0.1
"#;

    #[test]
    fn parses_and_applies_overrides() {
        let c = RunConfig::from_toml_str(BASE, &["model.theta=2".into(), "experiment.n_ladder=[8, 16, 32]".into(), "output.dir=/tmp/x".into()]).unwrap();
        assert_eq!(c.model.theta, 2.0);
        assert_eq!(c.experiment.n_ladder, Some(vec![8, 16, 32]));
        assert_eq!(c.output.dir, PathBuf::from("/tmp/x"));
        assert_eq!(c.model.rate, "constant");
        assert!(c.model.params().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_overrides() {
        assert!(RunConfig::from_toml_str(&format!("{BASE}\nbogus = 1\n"), &[]).is_err());
        assert!(RunConfig::from_toml_str(BASE, &["theta=2".into()]).is_err());
        assert!(RunConfig::from_toml_str(BASE, &["model.theta".into()]).is_err());
    }

    #[test]
    fn hash_is_stable_under_reformatting() {
        let a = RunConfig::from_toml_str(BASE, &[]).unwrap();
        let b = RunConfig::from_toml_str(&BASE.replace("theta = 1.0", "theta = 1"), &[]).unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = RunConfig::from_toml_str(BASE, &["experiment.seed=7".into()]).unwrap();
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    proptest! {
        #[test]
        fn toml_round_trip(n in 2usize..5000, theta in -3.0f64..3.0, a in 0.01f64..5.0, seed in 0u64..=i64::MAX as u64, m in proptest::option::of(1usize..100000)) {
            let mut c = RunConfig::from_toml_str(BASE, &[]).unwrap();
            c.model.n = n;
            c.model.theta = theta;
            c.model.alpha = a;
            c.experiment.seed = seed;
            c.experiment.trajectories = m;
            let text = c.to_toml_string().unwrap();
            let back = RunConfig::from_toml_str(&text, &[]).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.hash().unwrap(), c.hash().unwrap());
        }
    }
}
