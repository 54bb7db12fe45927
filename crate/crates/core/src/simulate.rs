//! Data generation from the zero-inflated Weibull cure rate regression model.
//!
//! For each subject: draw the covariates, link them to `(gamma0, gamma1,
//! alpha, lambda)`, draw `u ~ U(0,1)` and
//!
//! * `u <= gamma0`: latent time `s = 0` (fraudster);
//! * `u > 1 - gamma1`: `s = inf` (cured);
//! * otherwise draw `v ~ U(gamma0, 1 - gamma1)` and solve `F(s) = v`.
//!
//! Once every latent time exists, censoring times `w ~ U(0, B)` are drawn
//! with `B` the largest finite latent time, and `t = min(s, w)`. A tie
//! `s = w` counts as an event. Fraudsters have `t = 0 < w`, an event.
//!
//! Random numbers come from xoshiro256++ seeded through SplitMix64
//! ([`rng_from_seed`]). Uniforms use the top 52 bits of each output shifted
//! by half a step, so they lie strictly inside `(0, 1)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::links::{DesignSpec, SubjectParams};
use crate::weibull::{MixtureParams, WeibullParams};

pub type SimRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> SimRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Seed of replication `r` in a study with base seed `base`.
pub fn replication_seed(base: u64, r: u64) -> u64 {
    base ^ r
}

/// Uniform draw on the open interval `(0, 1)`.
pub fn uniform_open<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// The three coefficient presets of the single-covariate simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Low rates of fraudsters and cured.
    One,
    /// Moderate rates.
    Two,
    /// High rates.
    Three,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::One, Scenario::Two, Scenario::Three];

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Scenario::One),
            2 => Some(Scenario::Two),
            3 => Some(Scenario::Three),
            _ => None,
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Scenario::One => 1,
            Scenario::Two => 2,
            Scenario::Three => 3,
        }
    }

    /// `(b10, b11, b20, b21, b30, b31, b40, b41)`.
    pub fn coefficients(self) -> [f64; 8] {
        match self {
            Scenario::One => [-3.0, 1.0, -2.5, 0.3, 0.5, 0.5, 1.5, 2.0],
            Scenario::Two => [-2.0, 2.0, -1.5, 1.5, -0.5, 1.5, -0.5, 3.0],
            // The shape intercept is -1.0: only that value gives a mean shape of 1 at x = 0.5.
            Scenario::Three => [-0.5, 0.75, -0.35, 1.75, -1.0, 2.0, 1.25, 3.5],
        }
    }

    pub fn config(self, n: usize, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            name: alloc::format!("scenario{}", self.id()),
            coefficients: self.coefficients(),
            n,
            seed,
        }
    }
}

/// Single binary covariate `x ~ Bernoulli(0.5)` linked to all four parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub coefficients: [f64; 8],
    pub n: usize,
    pub seed: u64,
}

pub const SCENARIO_PARAM_NAMES: [&str; 8] = [
    "beta10", "beta11", "beta20", "beta21", "beta30", "beta31", "beta40", "beta41",
];

impl ScenarioConfig {
    pub fn design() -> DesignSpec {
        DesignSpec::fully_linked(&[0], 1).expect("single-covariate design is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter { name: "n", value: 0.0 });
        }
        if let Some(&c) = self.coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "coefficient",
                value: c,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Fraudster,
    Susceptible,
    Cured,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fraudster => "fraudster",
            Label::Susceptible => "susceptible",
            Label::Cured => "cured",
        }
    }
}

/// A generated dataset with diagnostics that fitting never sees.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub dataset: Dataset,
    pub labels: Vec<Label>,
    /// Latent times `s_i` (`inf` for the cured).
    pub latent: Vec<f64>,
    /// Upper bound `B` of the uniform censoring law.
    pub censoring_bound: f64,
}

/// Solves `F(t) = v` for the improper CDF by bisection. Cross-checks the
/// closed-form quantile path; `v` must lie in `(gamma0, 1 - gamma1)`.
pub fn solve_cdf_bisection(mix: &MixtureParams, v: f64) -> Result<f64> {
    if !(v > mix.gamma0() && v < 1.0 - mix.gamma1()) {
        return Err(Error::ProbabilityOutOfRange(v));
    }
    let mut hi = mix.weibull().scale();
    while mix.cdf(hi)? < v {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mix.cdf(mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Latent time for one subject from the uniform draws of the algorithm.
fn latent_time<R: RngCore>(sp: &SubjectParams, rng: &mut R) -> Result<(f64, Label)> {
    let u = uniform_open(rng);
    if u <= sp.gamma0 {
        return Ok((0.0, Label::Fraudster));
    }
    if u > 1.0 - sp.gamma1 {
        return Ok((f64::INFINITY, Label::Cured));
    }
    let upper = 1.0 - sp.gamma1;
    let v = sp.gamma0 + (upper - sp.gamma0) * uniform_open(rng);
    // F(s) = v  <=>  F*(s) = (v - gamma0) / (1 - gamma0 - gamma1)
    let p = ((v - sp.gamma0) / sp.susceptible).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    let s = WeibullParams::new(sp.alpha, sp.lambda)?.quantile(p)?;
    Ok((s.max(f64::MIN_POSITIVE), Label::Susceptible))
}

/// Generates `n` records; `covariates(i, rng)` supplies row `i` and may
/// draw from the generator.
pub fn simulate_records<R, F>(
    coefficients: &[f64],
    spec: &DesignSpec,
    names: Vec<String>,
    n: usize,
    mut covariates: F,
    rng: &mut R,
) -> Result<Simulation>
where
    R: RngCore,
    F: FnMut(usize, &mut R) -> Vec<f64>,
{
    let mut rows = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let x = covariates(i, rng);
        let sp = spec.link_flat(coefficients, &x)?;
        let (s, label) = latent_time(&sp, rng)?;
        rows.push(x);
        latent.push(s);
        labels.push(label);
    }
    let bound = latent.iter().copied().filter(|s| s.is_finite()).fold(0.0, f64::max);
    if !(bound > 0.0) {
        return Err(Error::NoCensoringBound);
    }
    let mut observations = Vec::with_capacity(n);
    for (s, x) in latent.iter().zip(rows) {
        let w = bound * uniform_open(rng);
        let (t, event) = if *s <= w { (*s, true) } else { (w, false) };
        observations.push(Observation::new(t, event, x)?);
    }
    Ok(Simulation {
        dataset: Dataset::new(observations, names)?,
        labels,
        latent,
        censoring_bound: bound,
    })
}

/// Dataset for a single-covariate scenario with `x ~ Bernoulli(0.5)`.
pub fn simulate_dataset(cfg: &ScenarioConfig) -> Result<Simulation> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    simulate_records(
        &cfg.coefficients,
        &ScenarioConfig::design(),
        vec![String::from("x")],
        cfg.n,
        |_, rng| vec![if uniform_open(rng) < 0.5 { 1.0 } else { 0.0 }],
        &mut rng,
    )
}
