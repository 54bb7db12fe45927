//! Plain-text fit report.

use std::fmt::Write as _;

use zicure_core::{predict, Dataset, FitResult};

use crate::dataset::{ColumnEncoding, Encoding};
use crate::error::Result;
use crate::model::Blocks;

/// Every level combination when all covariates are categorical (reference
/// levels last), otherwise `None`.
pub fn categorical_profiles(encoding: &Encoding) -> Option<Vec<Vec<f64>>> {
    let mut profiles = vec![Vec::new()];
    for c in &encoding.columns {
        let ColumnEncoding::Categorical { levels, .. } = c else { return None };
        let k = levels.len() - 1;
        profiles = profiles
            .into_iter()
            .flat_map(|p| {
                (0..=k).map(move |level| {
                    let mut q = p.clone();
                    q.extend((0..k).map(|i| if i == level { 1.0 } else { 0.0 }));
                    q
                })
            })
            .collect();
    }
    Some(profiles)
}

fn opt(v: Option<f64>, width: usize) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:>width$.7}"),
        _ => format!("{:>width$}", "NA"),
    }
}

pub fn fit_report(
    header: &str,
    fit: &FitResult,
    blocks: &Blocks,
    encoding: &Encoding,
    data: &Dataset,
    horizons: &[f64],
) -> Result<String> {
    let mut s = String::from(header);
    let _ = writeln!(s, "\nMaximum likelihood estimates");
    let _ = writeln!(
        s,
        "records: {}  zeros: {}  censored: {}",
        data.len(),
        data.n_zeros(),
        data.n_censored()
    );
    let _ = writeln!(s, "\n{:<10} {:<14} {:>14} {:>14} {:>10}", "parameter", "term", "estimate", "se", "|est|/se");
    for (i, (name, term)) in blocks.terms().into_iter().enumerate() {
        let se = fit.se.as_ref().map(|v| v[i]);
        let z = fit.z.as_ref().map(|v| v[i]);
        let z = match z {
            Some(z) if z.is_finite() => format!("{z:>10.3}"),
            _ => format!("{:>10}", "NA"),
        };
        let _ = writeln!(s, "{name:<10} {term:<14} {} {} {z}", opt(Some(fit.estimates[i]), 14), opt(se, 14));
    }
    let _ = writeln!(s, "\nlog-likelihood: {:.6}", fit.loglik);
    let _ = writeln!(
        s,
        "convergence: {} ({}) after {} iterations; max |score| = {:.3e}",
        if fit.converged { "converged" } else { "NOT converged" },
        fit.termination.as_str(),
        fit.iterations,
        fit.grad_inf
    );
    if fit.covariance.is_none() {
        let _ = writeln!(s, "warning: Hessian not negative definite; standard errors unavailable");
    }
    if fit.separation {
        let _ = writeln!(s, "warning: a fitted proportion sits at the boundary (separation)");
    }

    if let Some(profiles) = categorical_profiles(encoding) {
        let _ = writeln!(s, "\nDerived quantities by profile");
        let _ = write!(s, "{:<16} {:>12} {:>12} {:>12} {:>12}", "profile", "gamma0", "gamma1", "alpha", "lambda");
        for h in horizons {
            let _ = write!(s, " {:>12}", format!("S({h})"));
        }
        s.push('\n');
        for p in profiles {
            let pred = predict(fit, &p, horizons)?;
            let sp = pred.params;
            let _ = write!(
                s,
                "{:<16} {:>12.7} {:>12.7} {:>12.7} {:>12.7}",
                encoding.describe(&p),
                sp.gamma0,
                sp.gamma1,
                sp.alpha,
                sp.lambda
            );
            for v in pred.survival {
                let _ = write!(s, " {v:>12.7}");
            }
            s.push('\n');
        }
    }
    Ok(s)
}
