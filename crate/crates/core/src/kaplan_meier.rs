//! Product-limit (Kaplan-Meier) survival estimates and fitted-curve overlays.
//!
//! Zero times are events at `t = 0`, so the estimate drops immediately by
//! the fraction of fraudsters. At tied times events are processed before
//! censorings: a record censored at `t` is still at risk for events at `t`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::likelihood::FitResult;

/// Step function `S(t) = prod_{t_j <= t} (1 - d_j / n_j)` over distinct event times.
#[derive(Debug, Clone, PartialEq)]
pub struct KmCurve {
    pub label: String,
    pub times: Vec<f64>,
    /// Survival just after each event time.
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

impl KmCurve {
    /// Right-continuous value at `t`; 1 before the first event time.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&tj| tj <= t);
        if k == 0 {
            1.0
        } else {
            self.survival[k - 1]
        }
    }

    /// `(t, value before, value after)` for each event time.
    pub fn steps(&self) -> Vec<(f64, f64, f64)> {
        let mut before = 1.0;
        self.times
            .iter()
            .zip(&self.survival)
            .map(|(&t, &after)| {
                let step = (t, before, after);
                before = after;
                step
            })
            .collect()
    }
}

/// Product-limit estimate from `(time, event)` pairs.
pub fn product_limit(label: &str, records: &[(f64, bool)]) -> KmCurve {
    let mut sorted: Vec<(f64, bool)> = records.to_vec();
    // Events first within a tie.
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut curve = KmCurve {
        label: label.to_string(),
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        events: Vec::new(),
    };
    let mut remaining = sorted.len();
    let mut surv = 1.0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        let mut deaths = 0;
        let mut leaving = 0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                deaths += 1;
            }
            leaving += 1;
            i += 1;
        }
        if deaths > 0 {
            surv *= 1.0 - deaths as f64 / remaining as f64;
            curve.times.push(t);
            curve.survival.push(surv);
            curve.at_risk.push(remaining);
            curve.events.push(deaths);
        }
        remaining -= leaving;
    }
    curve
}

/// Kaplan-Meier estimate over the records selected by `stratum`.
pub fn km_estimate(data: &Dataset, label: &str, stratum: impl Fn(&Observation) -> bool) -> Result<KmCurve> {
    let records: Vec<(f64, bool)> = data
        .observations()
        .iter()
        .filter(|o| stratum(o))
        .map(|o| (o.time, o.event))
        .collect();
    if records.is_empty() {
        return Err(Error::EmptyStratum(label.to_string()));
    }
    Ok(product_limit(label, &records))
}

/// A covariate profile defining a stratum: records whose covariate row equals `profile`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub label: String,
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayRow {
    pub stratum: String,
    pub t: f64,
    pub km_surv: f64,
    pub fitted_surv: f64,
}

/// Kaplan-Meier and fitted improper survival side by side on a time grid,
/// one block of rows per stratum.
pub fn overlay_data(fit: &FitResult, data: &Dataset, strata: &[Stratum], grid: &[f64]) -> Result<Vec<OverlayRow>> {
    let max = data.max_time();
    if let Some(&t) = grid.iter().find(|&&t| !(t >= 0.0 && t <= max)) {
        return Err(Error::GridOutOfRange { t, max });
    }
    let mut rows = Vec::with_capacity(strata.len() * grid.len());
    for s in strata {
        let curve = km_estimate(data, &s.label, |o| o.covariates == s.profile)?;
        let params = fit.subject_params(&s.profile)?;
        for &t in grid {
            rows.push(OverlayRow {
                stratum: s.label.clone(),
                t,
                km_surv: curve.at(t),
                fitted_surv: params.survival(t)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Textbook product-limit: for every distinct event time, count at-risk
    /// and deaths by scanning the whole sample.
    fn textbook(records: &[(f64, bool)], t: f64) -> f64 {
        let mut event_times: Vec<f64> = records.iter().filter(|r| r.1).map(|r| r.0).collect();
        event_times.sort_by(f64::total_cmp);
        event_times.dedup();
        let mut s = 1.0;
        for tj in event_times.into_iter().filter(|&tj| tj <= t) {
            let n = records.iter().filter(|r| r.0 >= tj).count() as f64;
            let d = records.iter().filter(|r| r.1 && r.0 == tj).count() as f64;
            s *= 1.0 - d / n;
        }
        s
    }

    #[test]
    fn uncensored_matches_empirical() {
        let c = product_limit("a", &[(1.0, true), (2.0, true), (3.0, true)]);
        assert!((c.at(2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.at(0.5), 1.0);
        assert_eq!(c.at(3.0), 0.0);
    }

    #[test]
    fn zero_inflation_drop() {
        let mut recs = vec![(0.0, true); 3];
        recs.extend((1..=7).map(|i| (i as f64, i % 2 == 0)));
        let c = product_limit("z", &recs);
        assert!((c.at(0.0) - 0.7).abs() < 1e-15);
        assert_eq!(c.steps()[0], (0.0, 1.0, c.survival[0]));
    }

    #[test]
    fn events_before_censorings_at_ties() {
        // At t = 2: 3 at risk (one event, one censored, one later); S = 1 * (1 - 1/3).
        let c = product_limit("t", &[(2.0, false), (2.0, true), (5.0, true)]);
        assert_eq!(c.at_risk[0], 3);
        assert!((c.at(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matches_textbook_on_random_samples() {
        // Small LCG so the samples are fixed across runs.
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as u32
        };
        for _ in 0..100 {
            let n = 1 + (next() % 25) as usize;
            let recs: Vec<(f64, bool)> = (0..n)
                .map(|_| {
                    let t = (next() % 6) as f64;
                    (t, t == 0.0 || next() % 3 != 0)
                })
                .collect();
            let c = product_limit("r", &recs);
            for w in c.at_risk.windows(2) {
                assert!(w[1] < w[0]);
            }
            for t in [0.0, 0.5, 1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0] {
                assert_eq!(c.at(t), textbook(&recs, t));
            }
        }
    }

    #[test]
    fn empty_stratum_is_an_error() {
        let data = Dataset::new(vec![Observation::new(1.0, true, vec![1.0]).unwrap()], vec!["x".into()]).unwrap();
        assert!(matches!(km_estimate(&data, "none", |o| o.covariates[0] == 2.0), Err(Error::EmptyStratum(_))));
    }
}
