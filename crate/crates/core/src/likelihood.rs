//! Likelihood of the zero-inflated Weibull cure rate regression model,
//! numerical derivatives, maximum-likelihood fitting and prediction.
//!
//! Per-record log contributions:
//!
//! ```text
//! t = 0            log gamma0
//! t > 0, delta = 1 log[(1 - gamma0 - gamma1) f*(t)]
//! t > 0, delta = 0 log[gamma1 + (1 - gamma0 - gamma1) S*(t)]
//! ```
//!
//! The total is the plain sum of contributions with no constant dropped, so
//! values are comparable across runs and tools.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log, pow};

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::fd;
use crate::kaplan_meier::product_limit;
use crate::linalg::Matrix;
use crate::links::{logit_intercepts, Block, CoefficientBlock, Component, DesignSpec, SubjectParams, ETA_CLAMP};
use crate::optimizer::{maximize, OptControls, Termination};
use crate::pairwise_sum;

/// Proportions below this at the optimum mark the fit as separated.
pub const SEPARATION_THRESHOLD: f64 = 1e-6;

/// Log-likelihood contribution of one record. May be `-inf`.
#[inline]
pub fn contribution(obs: &Observation, sp: &SubjectParams) -> f64 {
    if obs.time == 0.0 {
        return log(sp.gamma0);
    }
    let z = obs.time / sp.lambda;
    let cum_hazard = pow(z, sp.alpha);
    if obs.event {
        log(sp.susceptible) + log(sp.alpha) - log(sp.lambda) + (sp.alpha - 1.0) * log(z) - cum_hazard
    } else {
        log(sp.gamma1 + sp.susceptible * exp(-cum_hazard))
    }
}

/// A dataset paired with a design, checked once so repeated evaluation is cheap.
#[derive(Debug, Clone, Copy)]
pub struct LogLik<'a> {
    data: &'a Dataset,
    spec: &'a DesignSpec,
}

impl<'a> LogLik<'a> {
    pub fn new(data: &'a Dataset, spec: &'a DesignSpec) -> Result<Self> {
        if data.covariate_names().len() != spec.n_covariates() {
            return Err(Error::DimensionMismatch {
                what: "covariate row",
                expected: spec.n_covariates(),
                found: data.covariate_names().len(),
            });
        }
        Ok(Self { data, spec })
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    /// Log-likelihood at `flat`; any non-finite total is reported as `-inf`.
    ///
    /// Panics if `flat` has the wrong length.
    pub fn eval(&self, flat: &[f64]) -> f64 {
        assert_eq!(flat.len(), self.spec.n_params(), "parameter vector length");
        let terms: Vec<f64> = self
            .data
            .observations()
            .iter()
            .map(|o| contribution(o, &SubjectParams::from_predictors(self.spec.predictors(flat, &o.covariates))))
            .collect();
        let total = pairwise_sum(&terms);
        if total.is_nan() || total == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            total
        }
    }
}

pub fn loglik(data: &Dataset, flat: &[f64], spec: &DesignSpec) -> Result<f64> {
    spec.check_flat(flat)?;
    Ok(LogLik::new(data, spec)?.eval(flat))
}

/// Central-difference score with steps `1e-5 * max(1, |theta_j|)`.
pub fn score_fd(data: &Dataset, flat: &[f64], spec: &DesignSpec) -> Result<Vec<f64>> {
    spec.check_flat(flat)?;
    let ll = LogLik::new(data, spec)?;
    fd::gradient(|p| ll.eval(p), flat, fd::DEFAULT_REL_STEP)
}

/// Central-difference Hessian with steps `1e-5 * max(1, |theta_j|)`.
pub fn hessian_fd(data: &Dataset, flat: &[f64], spec: &DesignSpec) -> Result<Matrix> {
    spec.check_flat(flat)?;
    let ll = LogLik::new(data, spec)?;
    fd::hessian(|p| ll.eval(p), flat, fd::DEFAULT_REL_STEP)
}

/// Estimates and their asymptotic summary.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: DesignSpec,
    pub coefficients: CoefficientBlock,
    /// Flat form of `coefficients`.
    pub estimates: Vec<f64>,
    /// `(-H)^-1` at the optimum; `None` when `-H` is not positive definite.
    pub covariance: Option<Matrix>,
    pub se: Option<Vec<f64>>,
    /// `|estimate| / se`.
    pub z: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub termination: Termination,
    pub grad_inf: f64,
    /// Some subject's fitted proportion collapsed to the boundary.
    pub separation: bool,
}

impl FitResult {
    pub fn subject_params(&self, x: &[f64]) -> Result<SubjectParams> {
        self.spec.link_flat(&self.estimates, x)
    }

    /// Attaches the covariance derived from a Hessian of the log-likelihood.
    pub fn set_hessian(&mut self, hessian: &Matrix) {
        self.covariance = hessian.scaled(-1.0).inverse_spd();
        match &self.covariance {
            Some(cov) => {
                let se: Vec<f64> = cov.diagonal().iter().map(|v| libm::sqrt(*v)).collect();
                self.z = Some(self.estimates.iter().zip(&se).map(|(e, s)| e.abs() / s).collect());
                self.se = Some(se);
            }
            None => {
                self.se = None;
                self.z = None;
            }
        }
    }
}

fn separation(data: &Dataset, spec: &DesignSpec, flat: &[f64]) -> bool {
    data.observations().iter().any(|o| {
        let eta = spec.predictors(flat, &o.covariates);
        let sp = SubjectParams::from_predictors(eta);
        let collapsed = |comp: Component, g: f64| {
            !matches!(spec.block(comp), Block::Off) && (g < SEPARATION_THRESHOLD || g > 1.0 - SEPARATION_THRESHOLD)
        };
        eta.iter().any(|e| e.is_finite() && e.abs() >= ETA_CLAMP)
            || collapsed(Component::ZeroInflation, sp.gamma0)
            || collapsed(Component::Cure, sp.gamma1)
    })
}

/// Least-squares fit of `log(-log S_KM(t))` on `log t` over positive event
/// times: returns `(shape, scale)` of the Weibull probability plot.
fn weibull_plot_start(data: &Dataset) -> (f64, f64) {
    let positive: Vec<(f64, bool)> = data
        .observations()
        .iter()
        .filter(|o| o.time > 0.0)
        .map(|o| (o.time, o.event))
        .collect();
    let km = product_limit("start", &positive);
    let pts: Vec<(f64, f64)> = km
        .times
        .iter()
        .zip(&km.survival)
        .filter(|(_, &s)| s > 0.0 && s < 1.0)
        .map(|(&t, &s)| (log(t), log(-log(s))))
        .collect();
    let fallback = || {
        let events: Vec<f64> = positive.iter().filter(|r| r.1).map(|r| r.0).collect();
        let mean = events.iter().sum::<f64>() / events.len().max(1) as f64;
        (1.0, if mean > 0.0 { mean } else { 1.0 })
    };
    if pts.len() < 2 {
        return fallback();
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if !(slope.is_finite() && slope > 0.0) {
        return fallback();
    }
    let intercept = my - slope * mx;
    let scale = exp(-intercept / slope);
    if !(scale.is_finite() && scale > 0.0) {
        return fallback();
    }
    (slope, scale)
}

/// Starting values: empirical logits for the proportion intercepts, a
/// Weibull probability-plot fit for shape and scale, all slopes zero.
pub fn default_init(data: &Dataset, spec: &DesignSpec) -> Vec<f64> {
    let defaults = data.n_defaults().max(1) as f64;
    let zeros = (data.n_zeros() as f64).max(0.5);
    let censored = (data.n_censored() as f64).max(0.5);
    let (shape, scale) = weibull_plot_start(data);
    let intercepts = [log(zeros / defaults), log(censored / defaults), log(shape), log(scale)];
    let mut flat = Vec::with_capacity(spec.n_params());
    for (block, start) in spec.blocks().iter().zip(intercepts) {
        if let Block::Linked(cols) = block {
            flat.push(start);
            flat.extend(core::iter::repeat(0.0).take(cols.len()));
        }
    }
    flat
}

fn check_fittable(data: &Dataset, spec: &DesignSpec) -> Result<()> {
    if data.n_defaults() == 0 {
        return Err(Error::Unidentified("no observed default with a positive time"));
    }
    if matches!(spec.block(Component::ZeroInflation), Block::Off) && data.n_zeros() > 0 {
        return Err(Error::Unidentified("zero times present but the zero-inflation block is off"));
    }
    Ok(())
}

/// Maximum-likelihood fit.
///
/// A run that stops without meeting a convergence criterion still returns
/// the best point found, flagged `converged = false`.
pub fn fit(data: &Dataset, spec: &DesignSpec, init: Option<&[f64]>, controls: &OptControls) -> Result<FitResult> {
    let ll = LogLik::new(data, spec)?;
    check_fittable(data, spec)?;
    let start = match init {
        Some(x0) => {
            spec.check_flat(x0)?;
            x0.to_vec()
        }
        None => default_init(data, spec),
    };
    let report = maximize(|p| ll.eval(p), &start, controls)?;
    let mut result = FitResult {
        spec: spec.clone(),
        coefficients: CoefficientBlock::unpack(&report.argmax, spec)?,
        separation: separation(data, spec, &report.argmax),
        estimates: report.argmax,
        covariance: None,
        se: None,
        z: None,
        loglik: report.value,
        converged: report.termination.converged(),
        iterations: report.iterations,
        termination: report.termination,
        grad_inf: report.grad_inf,
    };
    if let Ok(h) = fd::hessian(|p| ll.eval(p), &result.estimates, controls.fd_step) {
        result.set_hessian(&h);
    }
    Ok(result)
}

/// Linked parameters and improper survival at each horizon for one applicant.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub params: SubjectParams,
    pub survival: Vec<f64>,
}

pub fn predict(fit: &FitResult, x: &[f64], horizons: &[f64]) -> Result<Prediction> {
    let params = fit.subject_params(x)?;
    let survival = horizons.iter().map(|&t| params.survival(t)).collect::<Result<Vec<_>>>()?;
    Ok(Prediction { params, survival })
}

/// A `FitResult` for fixed coefficients with no optimisation, e.g. published
/// estimates or the true simulation parameters.
pub fn fixed_fit(spec: &DesignSpec, estimates: Vec<f64>) -> Result<FitResult> {
    Ok(FitResult {
        coefficients: CoefficientBlock::unpack(&estimates, spec)?,
        spec: spec.clone(),
        estimates,
        covariance: None,
        se: None,
        z: None,
        loglik: f64::NAN,
        converged: true,
        iterations: 0,
        termination: Termination::Gradient,
        grad_inf: f64::NAN,
        separation: false,
    })
}

/// Fraction of zero times among records whose covariate row equals `profile`.
pub fn zero_fraction(data: &Dataset, profile: &[f64]) -> Option<f64> {
    let (mut n, mut zeros) = (0usize, 0usize);
    for o in data.observations().iter().filter(|o| o.covariates == profile) {
        n += 1;
        zeros += o.is_zero() as usize;
    }
    (n > 0).then(|| zeros as f64 / n as f64)
}

/// Intercept-only start with the given proportions; handy for tests and
/// quick explorations.
pub fn intercepts_for(gamma0: f64, gamma1: f64, shape: f64, scale: f64) -> Vec<f64> {
    let (a, b) = logit_intercepts(gamma0, gamma1);
    vec![a, b, log(shape), log(scale)]
}
