//! Parallel Monte Carlo study and its CSV/table outputs.
//!
//! Replications run on a rayon pool; results are collected in replication
//! index order before aggregation, so summaries do not depend on the number
//! of threads.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zicure_core::montecarlo::{run_replication, summarize, Replication};
use zicure_core::simulate::{ScenarioConfig, SCENARIO_PARAM_NAMES};
use zicure_core::{Error as CoreError, McSummary, OptControls};

use crate::error::{CliError, Result};

pub fn run_study(
    cfg: &ScenarioConfig,
    sizes: &[usize],
    replications: usize,
    controls: &OptControls,
    threads: Option<usize>,
) -> Result<Vec<McSummary>> {
    if replications < 2 {
        return Err(CoreError::TooFewReplications(replications).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| {
        sizes
            .iter()
            .map(|&n| {
                let sized = ScenarioConfig { n, ..cfg.clone() };
                sized.validate()?;
                let reps: Vec<Replication> = (0..replications as u64)
                    .into_par_iter()
                    .map(|r| run_replication(&sized, r, controls))
                    .collect();
                Ok(summarize(&cfg.name, n, &cfg.coefficients, &reps))
            })
            .collect()
    })
}

pub const METRICS: [&str; 3] = ["mlea", "rmse", "sd"];

/// One long-format result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub scenario: String,
    pub n: usize,
    pub parameter: String,
    pub metric: String,
    pub value: f64,
}

pub fn rows(summaries: &[McSummary]) -> Vec<McRow> {
    let mut out = Vec::new();
    for s in summaries {
        for (p, name) in s.params.iter().zip(SCENARIO_PARAM_NAMES) {
            for (metric, value) in METRICS.into_iter().zip([p.mlea, p.rmse, p.sd]) {
                out.push(McRow {
                    scenario: s.scenario.clone(),
                    n: s.n,
                    parameter: name.to_string(),
                    metric: metric.to_string(),
                    value,
                });
            }
        }
    }
    out
}

/// Long-format CSV: `scenario,n,parameter,metric,value`.
pub fn results_csv(header: &str, summaries: &[McSummary]) -> String {
    let mut s = String::from(header);
    s.push_str("scenario,n,parameter,metric,value\n");
    for r in rows(summaries) {
        let _ = writeln!(s, "{},{},{},{},{}", r.scenario, r.n, r.parameter, r.metric, r.value);
    }
    s
}

pub fn read_results_csv(path: &Path) -> Result<Vec<McRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::format(path, e))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::format(path, e)))
        .collect()
}

fn block(s: &mut String, title: &str, summaries: &[McSummary], value: impl Fn(&zicure_core::ParamSummary) -> f64) {
    let _ = writeln!(s, "{title}");
    let _ = write!(s, "{:>6}", "n");
    for name in SCENARIO_PARAM_NAMES {
        let _ = write!(s, " {name:>10}");
    }
    s.push('\n');
    for m in summaries {
        let _ = write!(s, "{:>6}", m.n);
        for p in &m.params {
            let _ = write!(s, " {:>10.4}", value(p));
        }
        s.push('\n');
    }
}

/// Human-readable table grouped as MLEA / RMSE / SD, one row per sample size,
/// followed by relative bias and the censoring rate.
pub fn results_table(header: &str, summaries: &[McSummary]) -> String {
    let mut s = String::from(header);
    let mut scenarios: Vec<&str> = summaries.iter().map(|m| m.scenario.as_str()).collect();
    scenarios.dedup();
    for name in scenarios {
        let group: Vec<McSummary> = summaries.iter().filter(|m| m.scenario == name).cloned().collect();
        let _ = writeln!(s, "\nScenario {name}");
        let _ = write!(s, "{:>6}", "truth");
        for p in &group[0].params {
            let _ = write!(s, " {:>10.4}", p.truth);
        }
        s.push_str("\n\n");
        block(&mut s, "MLEA", &group, |p| p.mlea);
        block(&mut s, "RMSE", &group, |p| p.rmse);
        block(&mut s, "SD", &group, |p| p.sd);
        block(&mut s, "Relative bias", &group, |p| p.relative_bias);
        let _ = writeln!(s, "{:>6} {:>10} {:>10} {:>10}", "n", "CD(%)", "used", "failed");
        for m in &group {
            let _ = writeln!(
                s,
                "{:>6} {:>10.1} {:>10} {:>10}",
                m.n,
                100.0 * m.censoring_rate,
                m.replications,
                m.failed
            );
        }
    }
    s
}
