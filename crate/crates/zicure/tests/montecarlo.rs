use zicure::study::run_study;
use zicure_core::montecarlo::{run_replication, summarize, Replication};
use zicure_core::{OptControls, Scenario};

#[test]
fn estimator_quality_improves_with_sample_size() {
    let controls = OptControls::default();
    for sc in Scenario::ALL {
        let sums = run_study(&sc.config(0, 2024), &[100, 250, 2000], 100, &controls, None).unwrap();
        let (small, mid, large) = (&sums[0], &sums[1], &sums[2]);
        for s in &sums {
            assert!(s.replications >= 90, "scenario {}: {} failed at n={}", sc.id(), s.failed, s.n);
        }
        for (j, (a, b)) in mid.params.iter().zip(&large.params).enumerate() {
            assert!(b.rmse < a.rmse, "scenario {} param {j}: rmse {} -> {}", sc.id(), a.rmse, b.rmse);
            assert!(b.sd < a.sd, "scenario {} param {j}: sd {} -> {}", sc.id(), a.sd, b.sd);
        }
        let closer = small
            .params
            .iter()
            .zip(&large.params)
            .filter(|(a, b)| (b.mlea - b.truth).abs() <= (a.mlea - a.truth).abs())
            .count();
        assert!(closer >= 7, "scenario {}: only {closer}/8 biases shrank", sc.id());
        if sc == Scenario::One {
            assert!(large.params[6].rmse < 0.06, "rmse(beta40) = {}", large.params[6].rmse);
        }
        for s in &sums {
            let r = s.replications as f64;
            for p in &s.params {
                let rhs = p.sd * p.sd * (r - 1.0) / r + (p.mlea - p.truth).powi(2);
                assert!((p.rmse * p.rmse - rhs).abs() < 1e-10);
                assert_eq!(p.relative_bias, (p.mlea - p.truth) / p.truth.abs());
            }
        }
    }
}

#[test]
fn truth_as_fixed_estimates_gives_zero_error() {
    let truth = Scenario::Three.coefficients();
    let reps: Vec<Replication> = (0..10)
        .map(|_| Replication {
            estimates: Some(truth.to_vec()),
            censoring_rate: 0.5,
        })
        .collect();
    let s = summarize("scenario3", 500, &truth, &reps);
    for p in &s.params {
        assert_eq!((p.rmse, p.sd, p.mlea), (0.0, 0.0, p.truth));
    }
}

#[test]
fn non_converged_replication_only_changes_count() {
    let cfg = Scenario::Two.config(300, 77);
    let controls = OptControls::default();
    let mut reps: Vec<Replication> = (0..5).map(|r| run_replication(&cfg, r, &controls)).collect();
    let base = summarize(&cfg.name, 300, &cfg.coefficients, &reps);
    // A replication that hit the iteration cap.
    let starved = OptControls {
        max_iterations: 1,
        ..controls
    };
    let failed = run_replication(&cfg, 5, &starved);
    assert!(failed.estimates.is_none());
    reps.push(failed);
    let with = summarize(&cfg.name, 300, &cfg.coefficients, &reps);
    assert_eq!(with.params, base.params);
    assert_eq!(with.censoring_rate, base.censoring_rate);
    assert_eq!(with.failed, base.failed + 1);
}
