use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use zicure::commands::{self, Options, FIT_REPORT, KM_CSV, MC_CSV, MC_TABLE, MODEL_JSON, SCORES_CSV, SIMULATED_CSV, SIMULATED_META};
use zicure::dataset::{ColumnEncoding, Encoding};
use zicure::meta::Metadata;
use zicure::model::{Blocks, Coefficient, ModelFile};
use zicure_core::simulate::{rng_from_seed, simulate_records};
use zicure_core::{predict, DesignSpec};

const MODEL1: [f64; 8] = [-1.26264, 0.37604, 0.27879, 1.87945, -0.81176, -0.55874, 0.11249, 3.16833];

fn run(args: &[&str]) -> i32 {
    zicure::cli::run(std::iter::once("zicure").chain(args.iter().copied()))
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

/// Bank-like portfolio from the published Model 1 estimates, with the
/// categorical column `dx` in {1, 2, 3}.
fn write_portfolio(dir: &Path, seed: u64) -> PathBuf {
    let sizes = [1646usize, 1561, 942];
    let profiles = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
    let levels: Vec<usize> = sizes.iter().enumerate().flat_map(|(g, &n)| std::iter::repeat(g).take(n)).collect();
    let spec = DesignSpec::proportions_linked(&[0, 1], 2).unwrap();
    let sim = simulate_records(
        &MODEL1,
        &spec,
        vec!["dx1".into(), "dx2".into()],
        levels.len(),
        |i, _| profiles[levels[i]].to_vec(),
        &mut rng_from_seed(seed),
    )
    .unwrap();
    let mut s = String::from("t,delta,dx\n");
    for (o, g) in sim.dataset.observations().iter().zip(&levels) {
        let _ = writeln!(s, "{},{},{}", o.time, o.event as u8, g + 1);
    }
    let p = dir.join("portfolio.csv");
    std::fs::write(&p, s).unwrap();
    p
}

fn portfolio_model(dir: &Path) -> PathBuf {
    let names = vec!["dx1".to_string(), "dx2".to_string()];
    let blocks = Blocks::model1(&names);
    let model = ModelFile {
        metadata: Metadata::new("fit", None, "published"),
        encoding: Encoding {
            columns: vec![ColumnEncoding::Categorical {
                name: "dx".into(),
                levels: vec!["1".into(), "2".into(), "3".into()],
            }],
        },
        coefficients: blocks
            .terms()
            .into_iter()
            .zip(MODEL1)
            .map(|((name, term), estimate)| Coefficient { name, term, estimate, se: None })
            .collect(),
        blocks,
        covariance: None,
        loglik: None,
        n_obs: 4149,
        converged: true,
        termination: "gradient".into(),
        iterations: 0,
        separation: false,
    };
    let p = dir.join("portfolio.json");
    model.write(&p).unwrap();
    p
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["simulate", "--scenario", "2", "--n", "2000", "--seed", "7", "--out", out]), 0);
    let csv = read(dir.path().join(SIMULATED_CSV));
    assert!(csv.starts_with("# tool: zicure"));
    assert!(csv.contains("# seed: 7\n") && csv.contains("# config_sha256: "));
    let rows = data_lines(&csv);
    assert_eq!(rows[0], "t,delta,x,label");
    assert_eq!(rows.len(), 2001);
    let zeros = rows[1..].iter().filter(|r| r.starts_with("0,")).count() as f64 / 2000.0;
    assert!((zeros - 0.2).abs() < 0.04, "{zeros}");
    let meta: toml::Value = toml::from_str(&read(dir.path().join(SIMULATED_META))).unwrap();
    assert_eq!(meta["metadata"]["seed"].as_integer(), Some(7));
    assert!(meta["censoring_bound"].as_float().unwrap() > 0.0);
    assert_eq!(meta["coefficients"].as_array().unwrap().len(), 8);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["simulate", "--scenario", "2", "--n", "0", "--out", out]), 1);
    assert_eq!(run(&["simulate", "--scenario", "4", "--n", "10", "--out", out]), 1);
    assert_eq!(run(&["simulate", "--n", "10", "--out", out]), 1);
    assert_eq!(run(&["frobnicate"]), 1);
    assert_eq!(run(&["fit", "--out", out]), 1);
    assert_eq!(run(&["mc-study", "--replications", "1", "--out", out]), 1);
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,delta,x\n1,1,0\n0,0,1\n").unwrap();
    let cfg = dir.path().join("fit.toml");
    std::fs::write(&cfg, "data = \"bad.csv\"\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_zicure"))
        .args(["fit", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("row 2"));
    let usage = Command::new(env!("CARGO_BIN_EXE_zicure")).arg("simulate").output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn model1_fit_recovers_group_fractions() {
    let dir = tempfile::tempdir().unwrap();
    write_portfolio(dir.path(), 41);
    let cfg = dir.path().join("fit.toml");
    std::fs::write(&cfg, "data = \"portfolio.csv\"\ncategorical = [\"dx\"]\nmodel = \"model1\"\nhorizons = [56.0]\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["fit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let model = ModelFile::read(&out.join(MODEL_JSON)).unwrap();
    assert_eq!(model.coefficients.len(), 8);
    let fit = model.to_fit().unwrap();
    for (p, want) in [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]].iter().zip([0.0954, 0.0730, 0.0361]) {
        assert!((fit.subject_params(p).unwrap().gamma0 - want).abs() < 0.02);
    }
    let report = read(out.join(FIT_REPORT));
    assert!(report.contains("|est|/se") && report.contains("log-likelihood") && report.contains("S(56)"));
    assert!(report.contains("dx=3"));

    std::fs::write(&cfg, "data = \"portfolio.csv\"\ncategorical = [\"dx\"]\nmodel = \"model2\"\n").unwrap();
    let out2 = dir.path().join("out2");
    let code = run(&["fit", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert!(code == 0 || code == 3);
    assert_eq!(ModelFile::read(&out2.join(MODEL_JSON)).unwrap().coefficients.len(), 12);
}

#[test]
fn fit_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_portfolio(dir.path(), 2);
    let cfg = dir.path().join("fit.toml");
    std::fs::write(&cfg, "data = \"portfolio.csv\"\ncovariates = [\"income\"]\n").unwrap();
    let err = commands::fit(&Options {
        config: Some(cfg.clone()),
        out: dir.path().join("o"),
        ..Options::default()
    })
    .unwrap_err();
    assert!(err.to_string().contains("\"income\""), "{err}");
    assert_eq!(err.exit_code(), 1);

    // One iteration cannot converge: exit 3, report still written.
    std::fs::write(&cfg, "data = \"portfolio.csv\"\ncategorical = [\"dx\"]\n[controls]\nmax_iterations = 1\n").unwrap();
    let out = dir.path().join("nc");
    assert_eq!(run(&["fit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 3);
    assert!(read(out.join(FIT_REPORT)).contains("NOT converged"));
}

#[test]
fn score_reproduces_published_survival() {
    let dir = tempfile::tempdir().unwrap();
    portfolio_model(dir.path());
    std::fs::write(dir.path().join("applicants.csv"), "dx\n1\n2\n3\n").unwrap();
    let cfg = dir.path().join("score.toml");
    std::fs::write(&cfg, "model = \"portfolio.json\"\ndata = \"applicants.csv\"\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(&["score", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--horizons", "0,56"]),
        0
    );
    let text = read(out.join(SCORES_CSV));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "row,gamma0,gamma1,alpha,lambda,surv_0,surv_56");
    for (row, want) in rows[1..].iter().zip([0.6902227, 0.7460382, 0.8456093]) {
        let v: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[6] - want).abs() < 1e-4, "{}", v[6]);
        assert_eq!(1.0 - v[1] - v[5], 0.0, "S(0) = 1 - gamma0");
    }
}

#[test]
fn scoring_training_file_matches_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_portfolio(dir.path(), 5);
    let model_path = portfolio_model(dir.path());
    let cfg = dir.path().join("score.toml");
    std::fs::write(&cfg, "model = \"portfolio.json\"\ndata = \"portfolio.csv\"\nhorizons = [3.5, 56.0]\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["score", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let fit = ModelFile::read(&model_path).unwrap().to_fit().unwrap();
    let text = read(out.join(SCORES_CSV));
    let src = read(&data);
    for (row, line) in data_lines(&text)[1..].iter().zip(src.lines().skip(1)) {
        let dx: usize = line.rsplit(',').next().unwrap().parse().unwrap();
        let x = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]][dx - 1];
        let p = predict(&fit, &x, &[3.5, 56.0]).unwrap();
        let v: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(v, [p.params.gamma0, p.params.gamma1, p.params.alpha, p.params.lambda, p.survival[0], p.survival[1]]);
    }
}

#[test]
fn km_overlay_and_grid_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_portfolio(dir.path(), 8);
    portfolio_model(dir.path());
    let cfg = dir.path().join("km.toml");
    std::fs::write(&cfg, "data = \"portfolio.csv\"\nmodel = \"portfolio.json\"\ngrid_points = 11\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["km", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let text = read(out.join(KM_CSV));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "stratum,t,km_surv,fitted_surv");
    assert_eq!(rows.len(), 1 + 3 * 11);
    let first: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(first[1], "0");
    std::fs::write(&cfg, "data = \"portfolio.csv\"\nmodel = \"portfolio.json\"\ngrid = [-1.0]\n").unwrap();
    assert_eq!(run(&["km", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn mc_study_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["mc-study", "--scenario", "1", "--n", "150", "--replications", "3", "--seed", "4", "--out", out]), 0);
    let csv = read(dir.path().join(MC_CSV));
    assert_eq!(data_lines(&csv).len(), 1 + 24);
    assert!(read(dir.path().join(MC_TABLE)).contains("Scenario scenario1"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        assert_eq!(run(&["simulate", "--scenario", "3", "--n", "500", "--seed", "11", "--out", out]), 0);
    }
    for f in [SIMULATED_CSV, SIMULATED_META] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}
