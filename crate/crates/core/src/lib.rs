//! Zero-inflated Weibull cure rate regression.
//!
//! Loan lifetimes come from three populations: fraudsters whose lifetime is
//! exactly zero (proportion `gamma0`), cured clients who never default
//! (proportion `gamma1`), and susceptible clients whose default time follows
//! a Weibull law. Covariates enter through a multinomial logit for the two
//! proportions and log links for the Weibull shape and scale.
//!
//! The crate is `no_std` with `alloc`. Everything here is pure computation;
//! file formats, the CLI and the parallel study runner live in the `zicure`
//! crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
pub mod error;
pub mod fd;
pub mod kaplan_meier;
pub mod likelihood;
pub mod linalg;
pub mod links;
pub mod montecarlo;
pub mod optimizer;
pub mod simulate;
pub mod weibull;

pub use data::{Dataset, Observation};
pub use error::{Error, Result};
pub use kaplan_meier::{km_estimate, KmCurve};
pub use likelihood::{fit, loglik, predict, FitResult, Prediction};
pub use links::{link, Block, CoefficientBlock, Component, DesignSpec, SubjectParams};
pub use montecarlo::{McSummary, ParamSummary};
pub use optimizer::{maximize, OptControls, OptReport, Termination};
pub use simulate::{simulate_dataset, Label, Scenario, ScenarioConfig, Simulation};
pub use weibull::{MixtureParams, WeibullParams};

/// Sum with pairwise reduction; the order depends only on the slice length.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}
