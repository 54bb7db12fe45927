use zicure_core::likelihood::{score_fd, zero_fraction};
use zicure_core::simulate::{rng_from_seed, simulate_records};
use zicure_core::{fit, simulate_dataset, Block, Dataset, DesignSpec, OptControls, Scenario, ScenarioConfig};

/// Published Model 1 estimates (dummies dx1, dx2; level 3 is the reference).
const MODEL1: [f64; 8] = [-1.26264, 0.37604, 0.27879, 1.87945, -0.81176, -0.55874, 0.11249, 3.16833];
const PROFILES: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];

/// Portfolio with the group sizes of the bank data, simulated from Model 1.
fn model1_portfolio(seed: u64) -> Dataset {
    let sizes = [1646usize, 1561, 942];
    let rows: Vec<[f64; 2]> = sizes
        .iter()
        .zip(PROFILES)
        .flat_map(|(&n, p)| std::iter::repeat(p).take(n))
        .collect();
    let spec = DesignSpec::proportions_linked(&[0, 1], 2).unwrap();
    let mut rng = rng_from_seed(seed);
    simulate_records(
        &MODEL1,
        &spec,
        vec!["dx1".into(), "dx2".into()],
        rows.len(),
        |i, _| rows[i].to_vec(),
        &mut rng,
    )
    .unwrap()
    .dataset
}

#[test]
fn saturated_design_matches_empirical_zero_fractions() {
    let spec = DesignSpec::proportions_linked(&[0, 1], 2).unwrap();
    for seed in [1u64, 2, 3] {
        let data = model1_portfolio(seed);
        let f = fit(&data, &spec, None, &OptControls::default()).unwrap();
        assert!(f.converged);
        for (p, want) in PROFILES.iter().zip([0.0954, 0.0730, 0.0361]) {
            let g0 = f.subject_params(p).unwrap().gamma0;
            let empirical = zero_fraction(&data, p).unwrap();
            assert!((g0 - empirical).abs() < 1e-4, "{g0} vs {empirical}");
            assert!((g0 - want).abs() < 0.02);
        }
    }
}

#[test]
fn dropping_zeros_leaves_cure_and_weibull_unchanged() {
    let data = model1_portfolio(17);
    let full_spec = DesignSpec::proportions_linked(&[0, 1], 2).unwrap();
    let full = fit(&data, &full_spec, None, &OptControls::default()).unwrap();

    let positive = data.filter(|o| o.time > 0.0).unwrap();
    let reduced_spec = DesignSpec::new(
        [Block::Off, Block::Linked(vec![0, 1]), Block::intercept_only(), Block::intercept_only()],
        2,
    )
    .unwrap();
    let reduced = fit(&positive, &reduced_spec, None, &OptControls::default()).unwrap();
    assert!(full.converged && reduced.converged);
    for p in PROFILES {
        let a = full.subject_params(&p).unwrap();
        let b = reduced.subject_params(&p).unwrap();
        // Cure fraction among non-fraudsters.
        assert!((a.gamma1 / (1.0 - a.gamma0) - b.gamma1).abs() < 1e-3);
        assert!((a.alpha - b.alpha).abs() < 1e-3);
        assert!((a.lambda - b.lambda).abs() < 1e-3 * a.lambda);
    }
}

#[test]
fn exponential_nested_model_matches_closed_form() {
    // No fraud, no cure, shape fixed at 1: lambda_hat = total time / events.
    let spec = DesignSpec::new([Block::Off, Block::Off, Block::Fixed(0.0), Block::intercept_only()], 0).unwrap();
    let mut rng = rng_from_seed(77);
    let data = simulate_records(&[2.0f64.ln()], &spec, vec![], 3000, |_, _| vec![], &mut rng)
        .unwrap()
        .dataset;
    let f = fit(&data, &spec, None, &OptControls::default()).unwrap();
    let total: f64 = data.observations().iter().map(|o| o.time).sum();
    let events = data.observations().iter().filter(|o| o.event).count() as f64;
    let lambda = f.subject_params(&[]).unwrap().lambda;
    assert!((lambda - total / events).abs() < 1e-5 * lambda, "{lambda} vs {}", total / events);
    assert_eq!(f.estimates.len(), 1);

    // Plain Weibull with free shape nests the exponential: log-likelihood can only improve.
    let weibull = DesignSpec::new([Block::Off, Block::Off, Block::intercept_only(), Block::intercept_only()], 0).unwrap();
    let g = fit(&data, &weibull, None, &OptControls::default()).unwrap();
    assert!(g.loglik >= f.loglik - 1e-9);
    assert!((g.subject_params(&[]).unwrap().alpha - 1.0).abs() < 0.1);
}

#[test]
fn estimates_within_three_standard_errors() {
    let truth = Scenario::Two.coefficients();
    let spec = ScenarioConfig::design();
    let mut hits = [0usize; 8];
    for seed in 0..100u64 {
        let data = simulate_dataset(&Scenario::Two.config(2000, 1000 + seed)).unwrap().dataset;
        let f = fit(&data, &spec, None, &OptControls::default()).unwrap();
        let se = f.se.expect("covariance available");
        for j in 0..8 {
            if (f.estimates[j] - truth[j]).abs() <= 3.0 * se[j] {
                hits[j] += 1;
            }
        }
    }
    assert!(hits.iter().all(|&h| h >= 90), "{hits:?}");
}

#[test]
fn score_below_tolerance_at_reported_optimum() {
    let controls = OptControls::default();
    for (sc, seed) in [(Scenario::One, 3u64), (Scenario::Three, 4)] {
        let data = simulate_dataset(&sc.config(800, seed)).unwrap().dataset;
        let f = fit(&data, &ScenarioConfig::design(), None, &controls).unwrap();
        assert!(f.converged);
        let g = score_fd(&data, &f.estimates, &f.spec).unwrap();
        let g_inf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(g_inf <= controls.gradient_threshold(f.loglik));
    }
}

#[test]
fn group_without_zeros_is_flagged() {
    let mut data = model1_portfolio(5);
    // Turn the reference group's fraudsters into early defaults.
    let obs = data
        .observations()
        .iter()
        .cloned()
        .map(|mut o| {
            if o.covariates == [0.0, 0.0] && o.time == 0.0 {
                o.time = 0.5;
            }
            o
        })
        .collect();
    data = Dataset::new(obs, data.covariate_names().to_vec()).unwrap();
    let f = fit(&data, &DesignSpec::proportions_linked(&[0, 1], 2).unwrap(), None, &OptControls::default()).unwrap();
    assert!(f.separation);
}
