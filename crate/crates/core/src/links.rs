//! Covariate links: multinomial logit for `(gamma0, gamma1)` and log links
//! for the Weibull shape and scale.
//!
//! The four linear predictors are
//!
//! ```text
//! eta1 = x1 . beta1   (zero inflation)
//! eta2 = x2 . beta2   (cure)
//! eta3 = x3 . beta3   (shape, alpha = exp(eta3))
//! eta4 = x4 . beta4   (scale, lambda = exp(eta4))
//! ```
//!
//! where each `xj` is an intercept followed by the columns selected for that
//! block. Linear predictors are clamped to `[-ETA_CLAMP, ETA_CLAMP]` before
//! exponentiation; a fitted coefficient vector that pushes a predictor onto
//! the clamp indicates separation in the data.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, log};

use crate::error::{Error, Result};
use crate::weibull::{MixtureParams, WeibullParams};

pub const ETA_CLAMP: f64 = 700.0;

/// The four linked parameters, in coefficient-block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    ZeroInflation,
    Cure,
    Shape,
    Scale,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::ZeroInflation,
        Component::Cure,
        Component::Shape,
        Component::Scale,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Coefficient prefix used in reports (`beta1` .. `beta4`).
    pub fn prefix(self) -> &'static str {
        match self {
            Component::ZeroInflation => "beta1",
            Component::Cure => "beta2",
            Component::Shape => "beta3",
            Component::Scale => "beta4",
        }
    }
}

/// How one parameter depends on the covariates.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    /// Intercept plus one coefficient per listed covariate column.
    Linked(Vec<usize>),
    /// Linear predictor pinned to a constant; no free coefficients.
    Fixed(f64),
    /// Proportion held at exactly zero. Only valid for the zero-inflation
    /// and cure blocks.
    Off,
}

impl Block {
    pub fn intercept_only() -> Self {
        Block::Linked(Vec::new())
    }

    pub fn n_coefficients(&self) -> usize {
        match self {
            Block::Linked(cols) => cols.len() + 1,
            Block::Fixed(_) | Block::Off => 0,
        }
    }

    #[inline]
    fn predictor(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        match self {
            Block::Linked(cols) => {
                let mut eta = coeffs[0];
                for (b, &c) in coeffs[1..].iter().zip(cols) {
                    eta += b * x[c];
                }
                eta
            }
            Block::Fixed(v) => *v,
            Block::Off => f64::NEG_INFINITY,
        }
    }
}

/// Which covariate columns feed each of the four linked parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    blocks: [Block; 4],
    n_covariates: usize,
}

impl DesignSpec {
    /// `blocks` are in [`Component`] order. `n_covariates` is the arity of a
    /// covariate row.
    pub fn new(blocks: [Block; 4], n_covariates: usize) -> Result<Self> {
        for (block, comp) in blocks.iter().zip(Component::ALL) {
            match block {
                Block::Linked(cols) => {
                    if let Some(&bad) = cols.iter().find(|&&c| c >= n_covariates) {
                        return Err(Error::InvalidDesign(format!(
                            "{} references column {bad} but rows have {n_covariates} covariates",
                            comp.prefix()
                        )));
                    }
                }
                Block::Fixed(v) if !v.is_finite() => {
                    return Err(Error::InvalidDesign(format!(
                        "{} fixed at non-finite value",
                        comp.prefix()
                    )));
                }
                Block::Off if matches!(comp, Component::Shape | Component::Scale) => {
                    return Err(Error::InvalidDesign(format!(
                        "{} cannot be switched off",
                        comp.prefix()
                    )));
                }
                _ => {}
            }
        }
        Ok(Self {
            blocks,
            n_covariates,
        })
    }

    /// Every block linked to the same covariate columns.
    pub fn fully_linked(columns: &[usize], n_covariates: usize) -> Result<Self> {
        let b = Block::Linked(columns.to_vec());
        Self::new([b.clone(), b.clone(), b.clone(), b], n_covariates)
    }

    /// Proportions linked to `columns`, Weibull shape and scale intercept-only.
    pub fn proportions_linked(columns: &[usize], n_covariates: usize) -> Result<Self> {
        let b = Block::Linked(columns.to_vec());
        Self::new(
            [b.clone(), b, Block::intercept_only(), Block::intercept_only()],
            n_covariates,
        )
    }

    pub fn block(&self, comp: Component) -> &Block {
        &self.blocks[comp.index()]
    }

    pub fn blocks(&self) -> &[Block; 4] {
        &self.blocks
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn block_len(&self, comp: Component) -> usize {
        self.blocks[comp.index()].n_coefficients()
    }

    /// Length of the flat parameter vector.
    pub fn n_params(&self) -> usize {
        self.blocks.iter().map(Block::n_coefficients).sum()
    }

    /// Offsets of each block inside the flat vector.
    fn offsets(&self) -> [usize; 5] {
        let mut off = [0usize; 5];
        for (i, b) in self.blocks.iter().enumerate() {
            off[i + 1] = off[i] + b.n_coefficients();
        }
        off
    }

    /// Linear predictors `(eta1, eta2, eta3, eta4)` from a flat vector.
    /// Lengths are not checked; callers validate once up front.
    #[inline]
    pub(crate) fn predictors(&self, flat: &[f64], x: &[f64]) -> [f64; 4] {
        let off = self.offsets();
        let mut eta = [0.0; 4];
        for (i, b) in self.blocks.iter().enumerate() {
            eta[i] = b.predictor(&flat[off[i]..off[i + 1]], x);
        }
        eta
    }

    /// Subject parameters from a flat vector, checking lengths.
    pub fn link_flat(&self, flat: &[f64], x: &[f64]) -> Result<SubjectParams> {
        self.check_flat(flat)?;
        self.check_row(x)?;
        Ok(SubjectParams::from_predictors(self.predictors(flat, x)))
    }

    pub(crate) fn check_flat(&self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: self.n_params(),
                found: flat.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_row(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_covariates {
            return Err(Error::DimensionMismatch {
                what: "covariate row",
                expected: self.n_covariates,
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// The four regression coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    betas: [Vec<f64>; 4],
}

impl CoefficientBlock {
    pub fn new(beta1: Vec<f64>, beta2: Vec<f64>, beta3: Vec<f64>, beta4: Vec<f64>) -> Self {
        Self {
            betas: [beta1, beta2, beta3, beta4],
        }
    }

    pub fn beta(&self, comp: Component) -> &[f64] {
        &self.betas[comp.index()]
    }

    /// Concatenates the blocks in order `beta1, beta2, beta3, beta4`.
    pub fn pack(&self) -> Vec<f64> {
        self.betas.iter().flatten().copied().collect()
    }

    pub fn unpack(flat: &[f64], spec: &DesignSpec) -> Result<Self> {
        spec.check_flat(flat)?;
        let off = spec.offsets();
        let betas = core::array::from_fn(|i| flat[off[i]..off[i + 1]].to_vec());
        Ok(Self { betas })
    }

    fn check(&self, spec: &DesignSpec) -> Result<()> {
        for comp in Component::ALL {
            let expected = spec.block_len(comp);
            let found = self.betas[comp.index()].len();
            if expected != found {
                return Err(Error::DimensionMismatch {
                    what: comp.prefix(),
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }
}

/// Linked parameters for one subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectParams {
    pub gamma0: f64,
    pub gamma1: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// `1 - gamma0 - gamma1`, computed from the softmax directly rather
    /// than by subtraction.
    pub susceptible: f64,
}

impl SubjectParams {
    /// Applies the multinomial logit and log links to linear predictors.
    /// `-inf` in either proportion slot means that proportion is switched off.
    pub fn from_predictors(eta: [f64; 4]) -> Self {
        let clamp = |v: f64| {
            if v == f64::NEG_INFINITY {
                v
            } else {
                v.clamp(-ETA_CLAMP, ETA_CLAMP)
            }
        };
        let (e1, e2) = (clamp(eta[0]), clamp(eta[1]));
        let m = e1.max(e2).max(0.0);
        let z0 = exp(-m);
        let z1 = exp(e1 - m);
        let z2 = exp(e2 - m);
        let total = z0 + z1 + z2;
        SubjectParams {
            gamma0: z1 / total,
            gamma1: z2 / total,
            susceptible: z0 / total,
            alpha: exp(eta[2].clamp(-ETA_CLAMP, ETA_CLAMP)),
            lambda: exp(eta[3].clamp(-ETA_CLAMP, ETA_CLAMP)),
        }
    }

    pub fn weibull(&self) -> Result<WeibullParams> {
        WeibullParams::new(self.alpha, self.lambda)
    }

    pub fn mixture(&self) -> Result<MixtureParams> {
        MixtureParams::new(self.gamma0, self.gamma1, self.weibull()?)
    }

    /// Improper survival at `t >= 0`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        let s = self.weibull()?.survival(t)?;
        Ok(self.gamma1 + self.susceptible * s)
    }
}

/// Applies the links for one covariate row.
pub fn link(coeffs: &CoefficientBlock, covariates: &[f64], spec: &DesignSpec) -> Result<SubjectParams> {
    coeffs.check(spec)?;
    spec.check_row(covariates)?;
    let flat = coeffs.pack();
    Ok(SubjectParams::from_predictors(spec.predictors(&flat, covariates)))
}

/// Inverse of the proportion links at zero slopes: intercepts whose softmax
/// yields `(gamma0, gamma1)`.
pub fn logit_intercepts(gamma0: f64, gamma1: f64) -> (f64, f64) {
    let rest = 1.0 - gamma0 - gamma1;
    (log(gamma0 / rest), log(gamma1 / rest))
}
