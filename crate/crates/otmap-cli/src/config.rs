//! JSON config schemas for the subcommands, with exhaustive validation:
//! every problem in a config is reported, not just the first one.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

use otmap::experiments::{EstimatorKind, RunParams};
use otmap::synthetic::ProblemConfig;

/// Parse and validate a config file against the allowed keys of `schema`.
/// Collects all violations before failing.
pub fn load_config<T: for<'de> Deserialize<'de>>(
    path: &std::path::Path,
    schema: &[(&str, bool)], // (key, required)
) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing JSON in {}", path.display()))?;
    let Value::Object(map) = &value else {
        bail!("{}: config must be a JSON object", path.display());
    };
    let mut problems = Vec::new();
    for (key, required) in schema {
        if *required && !map.contains_key(*key) {
            problems.push(format!("missing required key \"{key}\""));
        }
    }
    for key in map.keys() {
        if !schema.iter().any(|(k, _)| k == key) {
            problems.push(format!("unknown key \"{key}\""));
        }
    }
    if !problems.is_empty() {
        bail!(
            "{}: invalid config:\n  - {}",
            path.display(),
            problems.join("\n  - ")
        );
    }
    serde_json::from_value(value).with_context(|| format!("decoding {}", path.display()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub problem: ProblemConfig,
    pub estimator: EstimatorKind,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub m_max: Option<usize>,
    /// Optional CI gate: fail (exit 2) when |fitted_slope + exponent| exceeds
    /// this tolerance.
    #[serde(default)]
    pub slope_tolerance: Option<f64>,
}

pub const RATES_SCHEMA: &[(&str, bool)] = &[
    ("problem", true),
    ("estimator", true),
    ("n_grid", true),
    ("reps", true),
    ("seed", true),
    ("m_max", false),
    ("slope_tolerance", false),
];

impl RatesConfig {
    pub fn params(&self) -> RunParams {
        let mut p = RunParams::default();
        if let Some(m) = self.m_max {
            p.m_max = m;
        }
        p
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub problems: Vec<ProblemConfig>,
    /// (m, n) sample-size pairs cycled across instances.
    pub sizes: Vec<(usize, usize)>,
    pub instances: usize,
    pub seed: u64,
}

pub const STABILITY_SCHEMA: &[(&str, bool)] =
    &[("problems", true), ("sizes", true), ("instances", true), ("seed", true)];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarycenterConfig {
    pub source: PathBuf,
    pub target: PathBuf,
}

pub const BARYCENTER_SCHEMA: &[(&str, bool)] = &[("source", true), ("target", true)];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndepCliConfig {
    pub x: PathBuf,
    pub y: PathBuf,
    pub alpha: f64,
    #[serde(default = "default_draws")]
    pub null_draws: usize,
    #[serde(default)]
    pub null_seed: u64,
}

fn default_draws() -> usize {
    2000
}

pub const INDEP_SCHEMA: &[(&str, bool)] = &[
    ("x", true),
    ("y", true),
    ("alpha", true),
    ("null_draws", false),
    ("null_seed", false),
];
