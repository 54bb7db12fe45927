//! TOML run configurations. Command-line flags override file values; the
//! resolved configuration is what gets hashed into output headers. Relative
//! paths are resolved against the configuration file's directory.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use zicure_core::OptControls;

use crate::dataset::ColumnSelection;
use crate::error::{CliError, Result};
use crate::model::Blocks;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Preset 1, 2 or 3.
    pub scenario: Option<u8>,
    /// Custom `(b10, b11, b20, b21, b30, b31, b40, b41)` for the
    /// single-covariate design; overrides the preset.
    pub coefficients: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Proportions linked to every covariate; intercept-only Weibull.
    #[default]
    Model1,
    /// Every parameter linked to every covariate.
    Model2,
    /// Layout given in `[blocks]`.
    Custom,
}

/// Optimiser settings; unset fields keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsConfig {
    pub max_iterations: Option<usize>,
    pub g_tol: Option<f64>,
    pub f_tol: Option<f64>,
    pub fd_step: Option<f64>,
}

impl ControlsConfig {
    pub fn resolve(&self) -> Result<OptControls> {
        let d = OptControls::default();
        let c = OptControls {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            g_tol: self.g_tol.unwrap_or(d.g_tol),
            f_tol: self.f_tol.unwrap_or(d.f_tol),
            fd_step: self.fd_step.unwrap_or(d.fd_step),
            ..d
        };
        c.validate().map_err(|e| CliError::Usage(format!("controls: {e}")))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub data: String,
    /// Covariate columns in model order; default: all but `t`, `delta`, `label`.
    pub covariates: Option<Vec<String>>,
    #[serde(default)]
    pub categorical: Vec<String>,
    #[serde(default)]
    pub model: ModelKind,
    /// Required when `model = "custom"`; names refer to expanded covariates.
    pub blocks: Option<Blocks>,
    /// Horizons for the derived per-profile block of the report.
    #[serde(default)]
    pub horizons: Vec<f64>,
    #[serde(default)]
    pub controls: ControlsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<u8>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; `None` uses all cores. Results do not depend on it.
    pub threads: Option<usize>,
    #[serde(default)]
    pub controls: ControlsConfig,
}

impl FitConfig {
    pub fn columns(&self) -> ColumnSelection {
        ColumnSelection {
            covariates: self.covariates.clone(),
            categorical: self.categorical.clone(),
        }
    }
}

fn default_scenarios() -> Vec<u8> {
    vec![1, 2, 3]
}
fn default_sizes() -> Vec<usize> {
    vec![100, 250, 500, 1000, 2000]
}
fn default_replications() -> usize {
    100
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            scenarios: default_scenarios(),
            sizes: default_sizes(),
            replications: default_replications(),
            seed: default_seed(),
            threads: None,
            controls: ControlsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KmConfig {
    pub data: String,
    /// Fitted model file written by `fit`.
    pub model: String,
    /// Explicit time grid; otherwise `grid_points` evenly spaced on `[0, max t]`.
    pub grid: Option<Vec<f64>>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_grid_points() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreConfig {
    pub model: String,
    /// Applicant covariates; outcome columns are ignored if present.
    pub data: String,
    #[serde(default)]
    pub horizons: Vec<f64>,
}

/// Parses a configuration file; a missing path yields `None`.
pub fn load<T: DeserializeOwned>(path: Option<&Path>) -> Result<Option<T>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    toml::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Canonical text used for the configuration hash.
pub fn canonical<T: Serialize>(cfg: &T) -> String {
    toml::to_string(cfg).expect("configuration serialises")
}

/// Resolves `p` against the configuration file's directory.
pub fn resolve_path(config: Option<&Path>, p: &str) -> PathBuf {
    let p = Path::new(p);
    match config.and_then(Path::parent) {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

/// Parses `--horizons 12,24,56`.
pub fn parse_horizons(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| {
            let v: f64 = part.trim().parse().map_err(|_| format!("bad horizon {part:?}"))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(format!("horizon {v} must be finite and nonnegative"))
            }
        })
        .collect()
}
