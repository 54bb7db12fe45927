//! Fitted-model files: pretty-printed JSON holding the design (by covariate
//! name), the flat coefficients and the covariance matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};
use zicure_core::likelihood::fixed_fit;
use zicure_core::linalg::Matrix;
use zicure_core::{Block, DesignSpec, FitResult, Termination};

use crate::dataset::{write_text, Encoding};
use crate::error::{CliError, Result};
use crate::meta::Metadata;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSpec {
    /// Intercept plus the named (expanded) covariates.
    Linked(Vec<String>),
    Fixed(f64),
    Off,
}

/// Block layout keyed by parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocks {
    pub gamma0: BlockSpec,
    pub gamma1: BlockSpec,
    pub shape: BlockSpec,
    pub scale: BlockSpec,
}

impl Blocks {
    fn as_array(&self) -> [&BlockSpec; 4] {
        [&self.gamma0, &self.gamma1, &self.shape, &self.scale]
    }

    /// Proportions linked to every covariate, intercept-only Weibull.
    pub fn model1(names: &[String]) -> Self {
        Blocks {
            gamma0: BlockSpec::Linked(names.to_vec()),
            gamma1: BlockSpec::Linked(names.to_vec()),
            shape: BlockSpec::Linked(vec![]),
            scale: BlockSpec::Linked(vec![]),
        }
    }

    /// All four parameters linked to every covariate.
    pub fn model2(names: &[String]) -> Self {
        Blocks {
            gamma0: BlockSpec::Linked(names.to_vec()),
            gamma1: BlockSpec::Linked(names.to_vec()),
            shape: BlockSpec::Linked(names.to_vec()),
            scale: BlockSpec::Linked(names.to_vec()),
        }
    }

    pub fn design(&self, names: &[String]) -> Result<DesignSpec> {
        let convert = |b: &BlockSpec| -> Result<Block> {
            Ok(match b {
                BlockSpec::Linked(cols) => Block::Linked(
                    cols.iter()
                        .map(|c| {
                            names
                                .iter()
                                .position(|n| n == c)
                                .ok_or_else(|| CliError::Usage(format!("unknown covariate {c:?} in model blocks")))
                        })
                        .collect::<Result<_>>()?,
                ),
                BlockSpec::Fixed(v) => Block::Fixed(*v),
                BlockSpec::Off => Block::Off,
            })
        };
        let [a, b, c, d] = self.as_array();
        DesignSpec::new([convert(a)?, convert(b)?, convert(c)?, convert(d)?], names.len())
            .map_err(|e| CliError::Usage(format!("model blocks: {e}")))
    }

    /// Coefficient names in flat order: `beta<k>0` for intercepts, then
    /// `beta<k><j>` for the j-th linked covariate.
    pub fn terms(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (k, b) in self.as_array().into_iter().enumerate() {
            if let BlockSpec::Linked(cols) = b {
                out.push((format!("beta{}0", k + 1), "intercept".to_string()));
                for (j, c) in cols.iter().enumerate() {
                    out.push((format!("beta{}{}", k + 1, j + 1), c.clone()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub term: String,
    pub estimate: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub metadata: Metadata,
    pub encoding: Encoding,
    pub blocks: Blocks,
    pub coefficients: Vec<Coefficient>,
    /// Row-major `(-H)^-1`; absent when the Hessian was not negative definite.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub loglik: Option<f64>,
    pub n_obs: usize,
    pub converged: bool,
    pub termination: String,
    pub iterations: usize,
    pub separation: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn parse_termination(s: &str) -> Option<Termination> {
    [
        Termination::Gradient,
        Termination::ObjectiveChange,
        Termination::MaxIterations,
        Termination::LineSearchFailure,
    ]
    .into_iter()
    .find(|t| t.as_str() == s)
}

impl ModelFile {
    pub fn from_fit(fit: &FitResult, encoding: &Encoding, blocks: &Blocks, n_obs: usize, metadata: Metadata) -> Self {
        let coefficients = blocks
            .terms()
            .into_iter()
            .enumerate()
            .map(|(i, (name, term))| Coefficient {
                name,
                term,
                estimate: fit.estimates[i],
                se: fit.se.as_ref().and_then(|s| finite(s[i])),
            })
            .collect();
        let covariance = fit
            .covariance
            .as_ref()
            .map(|m| (0..m.dim()).map(|i| m.row(i).to_vec()).collect());
        ModelFile {
            metadata,
            encoding: encoding.clone(),
            blocks: blocks.clone(),
            coefficients,
            covariance,
            loglik: finite(fit.loglik),
            n_obs,
            converged: fit.converged,
            termination: fit.termination.as_str().to_string(),
            iterations: fit.iterations,
            separation: fit.separation,
        }
    }

    pub fn design(&self) -> Result<DesignSpec> {
        self.blocks.design(&self.encoding.expanded_names())
    }

    /// Rebuilds the fit for prediction and reporting.
    pub fn to_fit(&self) -> Result<FitResult> {
        let spec = self.design()?;
        let estimates: Vec<f64> = self.coefficients.iter().map(|c| c.estimate).collect();
        if estimates.len() != spec.n_params() {
            return Err(CliError::Data(format!(
                "model has {} coefficients but its blocks need {}",
                estimates.len(),
                spec.n_params()
            )));
        }
        let mut fit = fixed_fit(&spec, estimates)?;
        fit.loglik = self.loglik.unwrap_or(f64::NAN);
        fit.converged = self.converged;
        fit.iterations = self.iterations;
        fit.separation = self.separation;
        fit.termination = parse_termination(&self.termination)
            .ok_or_else(|| CliError::Data(format!("unknown termination {:?}", self.termination)))?;
        if let Some(rows) = &self.covariance {
            let n = rows.len();
            let cov = Matrix::from_rows(n, rows.concat())
                .filter(|_| n == fit.estimates.len() && rows.iter().all(|r| r.len() == n))
                .ok_or_else(|| CliError::Data("covariance shape does not match coefficients".into()))?;
            let se: Vec<f64> = cov.diagonal().iter().map(|v| v.sqrt()).collect();
            fit.z = Some(fit.estimates.iter().zip(&se).map(|(e, s)| e.abs() / s).collect());
            fit.se = Some(se);
            fit.covariance = Some(cov);
        }
        Ok(fit)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::format(path, e))?;
        text.push('\n');
        write_text(path, &text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
    }
}
