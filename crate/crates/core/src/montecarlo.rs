//! Replicated simulate-then-fit studies of estimator quality.
//!
//! For every parameter the summary carries the mean estimate (MLEA), the
//! root mean squared error, the sample standard deviation (`R - 1`
//! denominator) and the relative bias `(MLEA - truth) / |truth|`.
//! Replications whose fit fails or does not converge are counted and left
//! out of every moment, including the censoring rate.

use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::likelihood::fit;
use crate::optimizer::OptControls;
use crate::simulate::{replication_seed, simulate_dataset, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummary {
    pub truth: f64,
    pub mlea: f64,
    pub rmse: f64,
    pub sd: f64,
    pub relative_bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub scenario: String,
    pub n: usize,
    pub params: Vec<ParamSummary>,
    /// Replications used in the moments.
    pub replications: usize,
    /// Mean censoring fraction over the used replications.
    pub censoring_rate: f64,
    pub failed: usize,
}

/// Outcome of one simulate-then-fit cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    /// `None` when the fit failed or did not converge.
    pub estimates: Option<Vec<f64>>,
    pub censoring_rate: f64,
}

/// Runs replication `r`: simulates with seed `base_seed ^ r` and fits from
/// the default starting values.
pub fn run_replication(cfg: &ScenarioConfig, r: u64, controls: &OptControls) -> Replication {
    let rep_cfg = ScenarioConfig {
        seed: replication_seed(cfg.seed, r),
        ..cfg.clone()
    };
    let Ok(sim) = simulate_dataset(&rep_cfg) else {
        return Replication {
            estimates: None,
            censoring_rate: f64::NAN,
        };
    };
    let censoring_rate = sim.dataset.censoring_rate();
    let estimates = fit(&sim.dataset, &ScenarioConfig::design(), None, controls)
        .ok()
        .filter(|f| f.converged && f.estimates.iter().all(|v| v.is_finite()))
        .map(|f| f.estimates);
    Replication {
        estimates,
        censoring_rate,
    }
}

/// Aggregates replications in index order.
pub fn summarize(scenario: &str, n: usize, truth: &[f64], reps: &[Replication]) -> McSummary {
    let used: Vec<(&Vec<f64>, f64)> = reps
        .iter()
        .filter_map(|r| r.estimates.as_ref().map(|e| (e, r.censoring_rate)))
        .collect();
    let count = used.len();
    let m = count as f64;
    let params = truth
        .iter()
        .enumerate()
        .map(|(j, &theta)| {
            // Centred on the truth: exact when every estimate equals it.
            let mlea = theta + used.iter().map(|(e, _)| e[j] - theta).sum::<f64>() / m;
            let ss: f64 = used.iter().map(|(e, _)| (e[j] - mlea) * (e[j] - mlea)).sum();
            let mse = used.iter().map(|(e, _)| (e[j] - theta) * (e[j] - theta)).sum::<f64>() / m;
            ParamSummary {
                truth: theta,
                mlea,
                rmse: sqrt(mse),
                sd: if count > 1 { sqrt(ss / (m - 1.0)) } else { f64::NAN },
                relative_bias: (mlea - theta) / theta.abs(),
            }
        })
        .collect();
    McSummary {
        scenario: String::from(scenario),
        n,
        params,
        replications: count,
        censoring_rate: used.iter().map(|(_, c)| c).sum::<f64>() / m,
        failed: reps.len() - count,
    }
}

/// Sequential study over `sizes` with `replications` cycles each.
pub fn run_study(cfg: &ScenarioConfig, sizes: &[usize], replications: usize, controls: &OptControls) -> Result<Vec<McSummary>> {
    if replications < 2 {
        return Err(Error::TooFewReplications(replications));
    }
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sized = ScenarioConfig { n, ..cfg.clone() };
        sized.validate()?;
        let reps: Vec<Replication> = (0..replications as u64)
            .map(|r| run_replication(&sized, r, controls))
            .collect();
        out.push(summarize(&cfg.name, n, &cfg.coefficients, &reps));
    }
    Ok(out)
}
