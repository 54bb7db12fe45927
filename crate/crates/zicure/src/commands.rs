//! The five subcommands. Each returns the files it wrote.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use zicure_core::kaplan_meier::{overlay_data, Stratum};
use zicure_core::simulate::{ScenarioConfig, SCENARIO_PARAM_NAMES};
use zicure_core::{km_estimate, predict, simulate_dataset, Scenario};

use crate::config::{self, canonical, load, resolve_path, FitConfig, KmConfig, ModelKind, ScoreConfig, SimulateConfig, StudyConfig};
use crate::dataset::{read_covariates, read_dataset, simulation_csv, write_text, ColumnSelection};
use crate::error::{CliError, Result};
use crate::meta::{sha256_hex, Metadata};
use crate::model::{Blocks, ModelFile};
use crate::report::fit_report;
use crate::study;

pub const SIMULATED_CSV: &str = "simulated.csv";
pub const SIMULATED_META: &str = "simulated.meta.toml";
pub const MODEL_JSON: &str = "model.json";
pub const FIT_REPORT: &str = "fit_report.txt";
pub const MC_CSV: &str = "mc_results.csv";
pub const MC_TABLE: &str = "mc_table.txt";
pub const KM_CSV: &str = "km.csv";
pub const KM_STEPS_CSV: &str = "km_steps.csv";
pub const SCORES_CSV: &str = "scores.csv";

/// Flags shared by the subcommands; each subcommand reads the ones it accepts.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub scenario: Option<u8>,
    pub n: Option<usize>,
    pub replications: Option<usize>,
    pub horizons: Option<Vec<f64>>,
}

fn required<T>(cfg: Option<T>, command: &str) -> Result<T> {
    cfg.ok_or_else(|| CliError::Usage(format!("{command} needs --config <path>")))
}

fn preset(id: u8) -> Result<Scenario> {
    Scenario::from_id(id).ok_or_else(|| CliError::Usage(format!("scenario must be 1, 2 or 3, got {id}")))
}

#[derive(Serialize)]
struct NamedValue {
    name: String,
    value: f64,
}

#[derive(Serialize)]
struct SimulationSidecar {
    metadata: Metadata,
    scenario: String,
    n: usize,
    censoring_bound: f64,
    zeros: usize,
    censored: usize,
    coefficients: Vec<NamedValue>,
}

pub fn simulate(opts: &Options) -> Result<Vec<PathBuf>> {
    let mut cfg: SimulateConfig = load(opts.config.as_deref())?.unwrap_or_default();
    cfg.scenario = opts.scenario.or(cfg.scenario);
    cfg.n = opts.n.or(cfg.n);
    cfg.seed = Some(opts.seed.or(cfg.seed).unwrap_or(config::DEFAULT_SEED));
    let n = match cfg.n {
        Some(0) => return Err(CliError::Usage("--n must be positive".into())),
        Some(n) => n,
        None => return Err(CliError::Usage("simulate needs --n (or n in the config)".into())),
    };
    let seed = cfg.seed.unwrap_or(config::DEFAULT_SEED);
    let (name, coefficients) = match (&cfg.coefficients, cfg.scenario) {
        (Some(c), _) => {
            let c: [f64; 8] = c
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage(format!("coefficients needs 8 values, got {}", c.len())))?;
            ("custom".to_string(), c)
        }
        (None, Some(id)) => {
            let sc = preset(id)?;
            (sc.config(n, seed).name, sc.coefficients())
        }
        (None, None) => return Err(CliError::Usage("simulate needs --scenario or coefficients".into())),
    };
    let sc_cfg = ScenarioConfig {
        name: name.clone(),
        coefficients,
        n,
        seed,
    };
    let sim = simulate_dataset(&sc_cfg)?;
    let meta = Metadata::new("simulate", Some(seed), &canonical(&cfg));

    let csv_path = opts.out.join(SIMULATED_CSV);
    write_text(&csv_path, &simulation_csv(&meta.comment_block(), &sim))?;
    let sidecar = SimulationSidecar {
        metadata: meta,
        scenario: name,
        n,
        censoring_bound: sim.censoring_bound,
        zeros: sim.dataset.n_zeros(),
        censored: sim.dataset.n_censored(),
        coefficients: SCENARIO_PARAM_NAMES
            .iter()
            .zip(coefficients)
            .map(|(name, value)| NamedValue {
                name: name.to_string(),
                value,
            })
            .collect(),
    };
    let meta_path = opts.out.join(SIMULATED_META);
    let text = toml::to_string(&sidecar).map_err(|e| CliError::format(&meta_path, e))?;
    write_text(&meta_path, &text)?;
    Ok(vec![csv_path, meta_path])
}

pub fn fit(opts: &Options) -> Result<Vec<PathBuf>> {
    let config_path = opts.config.as_deref();
    let mut cfg: FitConfig = required(load(config_path)?, "fit")?;
    if let Some(h) = &opts.horizons {
        cfg.horizons = h.clone();
    }
    let loaded = read_dataset(&resolve_path(config_path, &cfg.data), &cfg.columns(), None)?;
    let names = loaded.encoding.expanded_names();
    let blocks = match cfg.model {
        ModelKind::Model1 => Blocks::model1(&names),
        ModelKind::Model2 => Blocks::model2(&names),
        ModelKind::Custom => cfg
            .blocks
            .clone()
            .ok_or_else(|| CliError::Usage("model = \"custom\" needs a [blocks] table".into()))?,
    };
    let spec = blocks.design(&names)?;
    let controls = cfg.controls.resolve()?;
    let fit = zicure_core::fit(&loaded.dataset, &spec, None, &controls)?;

    let hashed = format!("{}data_sha256 = \"{}\"\n", canonical(&cfg), loaded.sha256);
    let meta = Metadata::new("fit", None, &hashed);
    let model_path = opts.out.join(MODEL_JSON);
    ModelFile::from_fit(&fit, &loaded.encoding, &blocks, loaded.dataset.len(), meta.clone()).write(&model_path)?;
    let report_path = opts.out.join(FIT_REPORT);
    let report = fit_report(
        &meta.comment_block(),
        &fit,
        &blocks,
        &loaded.encoding,
        &loaded.dataset,
        &cfg.horizons,
    )?;
    write_text(&report_path, &report)?;
    if !fit.converged {
        return Err(CliError::NonConvergence(fit.termination.as_str().to_string()));
    }
    Ok(vec![model_path, report_path])
}

pub fn mc_study(opts: &Options) -> Result<Vec<PathBuf>> {
    let mut cfg: StudyConfig = load(opts.config.as_deref())?.unwrap_or_default();
    if let Some(s) = opts.scenario {
        cfg.scenarios = vec![s];
    }
    if let Some(n) = opts.n {
        cfg.sizes = vec![n];
    }
    cfg.replications = opts.replications.unwrap_or(cfg.replications);
    cfg.seed = opts.seed.unwrap_or(cfg.seed);
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(CliError::Usage("sample sizes must be positive".into()));
    }
    if cfg.replications < 2 {
        return Err(CliError::Usage("--replications must be at least 2".into()));
    }
    if cfg.scenarios.is_empty() {
        return Err(CliError::Usage("no scenarios given".into()));
    }
    let scenarios = cfg.scenarios.iter().map(|&id| preset(id)).collect::<Result<Vec<_>>>()?;
    let controls = cfg.controls.resolve()?;

    let mut summaries = Vec::new();
    for sc in scenarios {
        summaries.extend(study::run_study(
            &sc.config(0, cfg.seed),
            &cfg.sizes,
            cfg.replications,
            &controls,
            cfg.threads,
        )?);
    }
    // Thread count never changes results, so it stays out of the hash.
    let hashed = canonical(&StudyConfig { threads: None, ..cfg.clone() });
    let header = Metadata::new("mc-study", Some(cfg.seed), &hashed).comment_block();
    let csv_path = opts.out.join(MC_CSV);
    write_text(&csv_path, &study::results_csv(&header, &summaries))?;
    let table_path = opts.out.join(MC_TABLE);
    write_text(&table_path, &study::results_table(&header, &summaries))?;
    Ok(vec![csv_path, table_path])
}

fn file_sha(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(CliError::io(path))?))
}

const MAX_STRATA: usize = 50;

pub fn km(opts: &Options) -> Result<Vec<PathBuf>> {
    let config_path = opts.config.as_deref();
    let cfg: KmConfig = required(load(config_path)?, "km")?;
    let model_path = resolve_path(config_path, &cfg.model);
    let model = ModelFile::read(&model_path)?;
    let fit = model.to_fit()?;
    let loaded = read_dataset(&resolve_path(config_path, &cfg.data), &ColumnSelection::default(), Some(&model.encoding))?;
    let data = &loaded.dataset;

    let mut profiles: Vec<Vec<f64>> = data.observations().iter().map(|o| o.covariates.clone()).collect();
    profiles.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    profiles.dedup();
    if profiles.len() > MAX_STRATA {
        return Err(CliError::Data(format!(
            "{} distinct covariate profiles; K-M strata need categorical covariates (at most {MAX_STRATA} profiles)",
            profiles.len()
        )));
    }
    let strata: Vec<Stratum> = profiles
        .into_iter()
        .map(|p| Stratum {
            label: model.encoding.describe(&p),
            profile: p,
        })
        .collect();
    let grid = match &cfg.grid {
        Some(g) => g.clone(),
        None => {
            if cfg.grid_points < 2 {
                return Err(CliError::Usage("grid_points must be at least 2".into()));
            }
            let max = data.max_time();
            let m = cfg.grid_points - 1;
            (0..=m).map(|i| max * i as f64 / m as f64).collect()
        }
    };
    let rows = overlay_data(&fit, data, &strata, &grid)?;

    let hashed = format!(
        "{}data_sha256 = \"{}\"\nmodel_sha256 = \"{}\"\n",
        canonical(&cfg),
        loaded.sha256,
        file_sha(&model_path)?
    );
    let header = Metadata::new("km", None, &hashed).comment_block();
    let mut csv = header.clone();
    csv.push_str("stratum,t,km_surv,fitted_surv\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.stratum, r.t, r.km_surv, r.fitted_surv);
    }
    let mut steps = header;
    steps.push_str("stratum,t,surv_before,surv_after\n");
    for s in &strata {
        let curve = km_estimate(data, &s.label, |o| o.covariates == s.profile)?;
        for (t, before, after) in curve.steps() {
            let _ = writeln!(steps, "{},{t},{before},{after}", s.label);
        }
    }
    let km_path = opts.out.join(KM_CSV);
    write_text(&km_path, &csv)?;
    let steps_path = opts.out.join(KM_STEPS_CSV);
    write_text(&steps_path, &steps)?;
    Ok(vec![km_path, steps_path])
}

pub fn score(opts: &Options) -> Result<Vec<PathBuf>> {
    let config_path = opts.config.as_deref();
    let mut cfg: ScoreConfig = required(load(config_path)?, "score")?;
    if let Some(h) = &opts.horizons {
        cfg.horizons = h.clone();
    }
    let model_path = resolve_path(config_path, &cfg.model);
    let model = ModelFile::read(&model_path)?;
    let fit = model.to_fit()?;
    let (rows, data_sha) = read_covariates(&resolve_path(config_path, &cfg.data), &model.encoding)?;

    let hashed = format!(
        "{}data_sha256 = \"{data_sha}\"\nmodel_sha256 = \"{}\"\n",
        canonical(&cfg),
        file_sha(&model_path)?
    );
    let mut csv = Metadata::new("score", None, &hashed).comment_block();
    csv.push_str("row,gamma0,gamma1,alpha,lambda");
    for h in &cfg.horizons {
        let _ = write!(csv, ",surv_{h}");
    }
    csv.push('\n');
    for (i, x) in rows.iter().enumerate() {
        let p = predict(&fit, x, &cfg.horizons)?;
        let sp = p.params;
        let _ = write!(csv, "{},{},{},{},{}", i + 1, sp.gamma0, sp.gamma1, sp.alpha, sp.lambda);
        for s in p.survival {
            let _ = write!(csv, ",{s}");
        }
        csv.push('\n');
    }
    let path = opts.out.join(SCORES_CSV);
    write_text(&path, &csv)?;
    Ok(vec![path])
}
