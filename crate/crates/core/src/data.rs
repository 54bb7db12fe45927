use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One loan record.
///
/// A time of exactly zero marks a fraudster and is always an observed event.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub time: f64,
    /// `true` for an observed default (delta = 1), `false` when right-censored.
    pub event: bool,
    pub covariates: Vec<f64>,
}

impl Observation {
    pub fn new(time: f64, event: bool, covariates: Vec<f64>) -> Result<Self> {
        let obs = Self {
            time,
            event,
            covariates,
        };
        obs.validate(0)?;
        Ok(obs)
    }

    pub fn is_zero(&self) -> bool {
        self.time == 0.0
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(Error::InvalidObservation {
                index,
                reason: "time must be finite and non-negative",
            });
        }
        if self.time == 0.0 && !self.event {
            return Err(Error::InvalidObservation {
                index,
                reason: "a zero time is a fraud event and cannot be censored",
            });
        }
        if self.covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObservation {
                index,
                reason: "covariates must be finite",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    covariate_names: Vec<String>,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>, covariate_names: Vec<String>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (i, obs) in observations.iter().enumerate() {
            obs.validate(i)?;
            if obs.covariates.len() != covariate_names.len() {
                return Err(Error::DimensionMismatch {
                    what: "covariate row",
                    expected: covariate_names.len(),
                    found: obs.covariates.len(),
                });
            }
        }
        Ok(Self {
            observations,
            covariate_names,
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn n_zeros(&self) -> usize {
        self.observations.iter().filter(|o| o.is_zero()).count()
    }

    pub fn n_censored(&self) -> usize {
        self.observations.iter().filter(|o| !o.event).count()
    }

    /// Observed defaults with a positive time.
    pub fn n_defaults(&self) -> usize {
        self.observations
            .iter()
            .filter(|o| o.event && o.time > 0.0)
            .count()
    }

    pub fn censoring_rate(&self) -> f64 {
        self.n_censored() as f64 / self.len() as f64
    }

    pub fn max_time(&self) -> f64 {
        self.observations.iter().map(|o| o.time).fold(0.0, f64::max)
    }

    /// Keeps the records for which `keep` returns true.
    pub fn filter(&self, keep: impl Fn(&Observation) -> bool) -> Result<Self> {
        Self::new(
            self.observations.iter().filter(|o| keep(o)).cloned().collect(),
            self.covariate_names.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_time_must_be_event() {
        assert!(Observation::new(0.0, false, vec![]).is_err());
        assert!(Observation::new(0.0, true, vec![]).is_ok());
        assert!(Observation::new(-1.0, true, vec![]).is_err());
        assert!(Observation::new(f64::NAN, true, vec![]).is_err());
    }

    #[test]
    fn dataset_checks_arity() {
        let a = Observation::new(1.0, true, vec![1.0]).unwrap();
        let b = Observation::new(2.0, false, vec![]).unwrap();
        assert!(matches!(
            Dataset::new(vec![a.clone(), b], vec!["x".into()]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(Dataset::new(vec![], vec![]), Err(Error::EmptyDataset));
        let d = Dataset::new(vec![a], vec!["x".into()]).unwrap();
        assert_eq!(d.n_defaults(), 1);
    }
}
