//! Weibull distribution functions and the zero-inflated cure rate mixture.
//!
//! The mixture puts mass `gamma0` at time zero, mass `gamma1` at infinity
//! (the cured) and spreads the remaining `1 - gamma0 - gamma1` according to
//! a Weibull law:
//!
//! ```text
//! S(t) = gamma1 + (1 - gamma0 - gamma1) * S*(t)
//! F(t) = gamma0 + (1 - gamma0 - gamma1) * F*(t)
//! ```

use libm::{exp, expm1, lgamma, log, log1p, pow, sqrt};

use crate::error::{Error, Result};

/// Shape and scale of a two-parameter Weibull distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    shape: f64,
    scale: f64,
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 || t == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::InvalidParameter {
                name: "shape",
                value: shape,
            });
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
            });
        }
        Ok(Self { shape, scale })
    }

    /// Builds the parameters from their logarithms, as produced by the log links.
    pub fn from_log(log_shape: f64, log_scale: f64) -> Result<Self> {
        Self::new(exp(log_shape), exp(log_scale))
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(t / scale)^shape`, the cumulative hazard.
    #[inline]
    pub(crate) fn cum_hazard(&self, t: f64) -> f64 {
        pow(t / self.scale, self.shape)
    }

    /// `F*(t) = 1 - exp(-(t/scale)^shape)`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(-expm1(-self.cum_hazard(t)))
    }

    /// `S*(t) = exp(-(t/scale)^shape)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(exp(-self.cum_hazard(t)))
    }

    /// Density. At `t = 0` the density is `+inf` for `shape < 1`, `1/scale`
    /// for `shape == 1` and `0` otherwise.
    pub fn pdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if t == 0.0 {
            return Ok(if self.shape < 1.0 {
                f64::INFINITY
            } else if self.shape == 1.0 {
                1.0 / self.scale
            } else {
                0.0
            });
        }
        Ok(exp(self.ln_pdf_positive(t)))
    }

    /// Log-density for `t > 0`, evaluated without forming the density.
    #[inline]
    pub(crate) fn ln_pdf_positive(&self, t: f64) -> f64 {
        let z = t / self.scale;
        log(self.shape) - log(self.scale) + (self.shape - 1.0) * log(z) - pow(z, self.shape)
    }

    /// Inverse of [`cdf`](Self::cdf) on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.scale * pow(-log1p(-u), 1.0 / self.shape))
    }

    /// Mean and standard deviation, `scale * Gamma(1 + k/shape)` moments
    /// computed through log-gamma.
    pub fn moments(&self) -> (f64, f64) {
        let lg1 = lgamma(1.0 + 1.0 / self.shape);
        let lg2 = lgamma(1.0 + 2.0 / self.shape);
        let mean = self.scale * exp(lg1);
        // Gamma(1+2/k) - Gamma(1+1/k)^2, factored to keep the exponentials bounded.
        let var_ratio = -expm1(2.0 * lg1 - lg2);
        let sd = self.scale * sqrt(exp(lg2) * var_ratio);
        (mean, sd)
    }
}

/// Proportions and susceptible Weibull law of the zero-inflated cure rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    gamma0: f64,
    gamma1: f64,
    weibull: WeibullParams,
}

impl MixtureParams {
    /// Requires `gamma0 >= 0`, `gamma1 >= 0` and `gamma0 + gamma1 < 1`.
    pub fn new(gamma0: f64, gamma1: f64, weibull: WeibullParams) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma0",
                value: gamma0,
            });
        }
        if !(gamma1.is_finite() && gamma1 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma1",
                value: gamma1,
            });
        }
        if gamma0 + gamma1 >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "gamma0 + gamma1",
                value: gamma0 + gamma1,
            });
        }
        Ok(Self {
            gamma0,
            gamma1,
            weibull,
        })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn weibull(&self) -> WeibullParams {
        self.weibull
    }

    /// Mass of the susceptible population, `1 - gamma0 - gamma1`.
    pub fn susceptible(&self) -> f64 {
        1.0 - self.gamma0 - self.gamma1
    }

    /// Improper survival `gamma1 + (1 - gamma0 - gamma1) S*(t)`.
    ///
    /// `S(0) = 1 - gamma0` and `S(t) -> gamma1` as `t -> inf`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        Ok(self.gamma1 + self.susceptible() * self.weibull.survival(t)?)
    }

    /// Improper CDF `gamma0 + (1 - gamma0 - gamma1) F*(t)`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        Ok(self.gamma0 + self.susceptible() * self.weibull.cdf(t)?)
    }

    /// Absolutely continuous part of the distribution, `(1 - gamma0 - gamma1) f*(t)`.
    /// The atom at zero is [`zero_mass`](Self::zero_mass).
    pub fn density(&self, t: f64) -> Result<f64> {
        Ok(self.susceptible() * self.weibull.pdf(t)?)
    }

    /// Point mass at `t = 0`.
    pub fn zero_mass(&self) -> f64 {
        self.gamma0
    }
}
