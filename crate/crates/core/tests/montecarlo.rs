use proptest::prelude::*;

use stochrate::montecarlo::{
    default_horizon, estimate_mean_functional, estimate_path_means, estimate_sup_exceedance,
    run_trials_with, validate_as_rate, validate_fast_bound, validate_mean_rate, ville_check,
    Execution,
};
use stochrate::moduli::sicc_identity;
use stochrate::processes::random::trial_seed;
use stochrate::processes::{counterexample_model, km_model, rm_model, Counterexample, Field};
use stochrate::rates::rate_rs;
use stochrate::{
    EstimateWithCI, Error, McConfig, Process, RateAsFn, RateBundle, RowStatus, Schedule, Space,
    StatePoint,
};

fn first(x: &StatePoint) -> f64 {
    x.first()
}

fn noiseless_km() -> stochrate::ProcessModel {
    km_model(0.5, Schedule::Const(1.0), Schedule::Const(0.0), Space::Euclidean { dim: 1 }, StatePoint::scalar(1.0)).unwrap()
}

fn noisy_rm() -> stochrate::ProcessModel {
    rm_model(
        Field::Linear { beta: 1.0, dim: 2 },
        1.0,
        Schedule::Harmonic { beta: 1.0, r: 2.0 },
        StatePoint::Euclidean(vec![1.0, -1.0]),
    )
    .unwrap()
}

#[test]
fn config_validation() {
    assert!(matches!(McConfig::new(1, 10, 0), Err(Error::Config { .. })));
    assert!(matches!(McConfig::new(10, 0, 0), Err(Error::Config { .. })));
    let mut cfg = McConfig::new(10, 10, 0).unwrap();
    cfg.ci_multiplier = -1.0;
    assert!(cfg.validate().is_err());
    assert_eq!(default_horizon(5), 1005);
    assert_eq!(default_horizon(1000), 10_000);
}

#[test]
fn runs_are_deterministic_and_mode_independent() {
    let m = noisy_rm();
    let cfg = McConfig::new(3000, 50, 99).unwrap();
    let g = |x: &StatePoint| m.target_dist(x);
    let a = estimate_path_means(&m, &g, &[5, 20, 50], &cfg).unwrap();
    let b = estimate_path_means(&m, &g, &[50, 5, 20], &cfg).unwrap();
    assert_eq!(a[0], b[1]);
    assert_eq!(a[2], b[0]);

    let trial = |_: u64, rng: &mut stochrate::RandomSource| rng.normal();
    let seq = run_trials_with(&cfg, Execution::Sequential, trial);
    let par = run_trials_with(&cfg, Execution::Parallel, trial);
    assert_eq!(seq, par);

    let other = McConfig { master_seed: 100, ..cfg };
    assert_ne!(estimate_path_means(&m, &g, &[20], &other).unwrap()[0], a[1]);
}

#[test]
fn trial_streams_split_and_pool() {
    let cfg = McConfig::new(2000, 1, 5).unwrap();
    let trial = |_: u64, rng: &mut stochrate::RandomSource| rng.uniform();
    let all = run_trials_with(&cfg, Execution::Sequential, trial);
    let head = run_trials_with(&McConfig { trials: 1200, ..cfg }, Execution::Sequential, trial);
    let tail = run_trials_with(&McConfig { trials: 800, first_trial: 1200, ..cfg }, Execution::Sequential, trial);
    assert_eq!([head, tail].concat(), all);
    assert_ne!(trial_seed(5, 0), trial_seed(5, 1));
}

#[test]
fn standard_error_scales_with_trials() {
    // X_0 ∈ {0, 2} uniformly: sd 1
    let m = counterexample_model(false);
    let se = |n| estimate_mean_functional(&m, &first, 0, &McConfig::new(n, 1, 3).unwrap()).unwrap().std_err;
    let (small, large) = (se(4_000), se(64_000));
    assert!((small / large - 4.0).abs() < 0.2, "{small} {large}");
    assert!((large * 64_000f64.sqrt() - 1.0).abs() < 0.01);
}

#[test]
fn deterministic_models_have_zero_error() {
    let m = noiseless_km();
    let est = estimate_mean_functional(&m, &first, 6, &McConfig::new(50, 10, 1).unwrap()).unwrap();
    assert_eq!(est.std_err, 0.0);
    assert_eq!(est.mean, 0.5f64.powi(6));
    assert!(estimate_mean_functional(&m, &first, 11, &McConfig::new(50, 10, 1).unwrap()).is_err());
}

#[test]
fn exceedance_examples() {
    let m = counterexample_model(false);
    let cfg = McConfig::new(40_000, 30, 8).unwrap();
    let est = estimate_sup_exceedance(&m, 0, 0.5, &cfg).unwrap();
    assert!(est.agrees_with(Counterexample::exceedance(0.5, 0, 30), 4.0));
    assert_eq!(Counterexample::exceedance(0.5, 0, 30), 0.5);
    let est = estimate_sup_exceedance(&m, 2, 5.0, &cfg).unwrap();
    assert!(est.agrees_with(0.125, 4.0), "{est:?}");

    // 0.5^10 < 0.01
    let km = noiseless_km();
    let est = estimate_sup_exceedance(&km, 10, 0.01, &McConfig::new(100, 500, 8).unwrap()).unwrap();
    assert_eq!(est.mean, 0.0);
    let est = estimate_sup_exceedance(&km, 6, 0.01, &McConfig::new(100, 500, 8).unwrap()).unwrap();
    assert_eq!(est.mean, 1.0);
}

#[test]
fn ville_rows() {
    let m = counterexample_model(false);
    let row = ville_check(&m, 1.0, &McConfig::new(20_000, 40, 2).unwrap()).unwrap();
    assert_eq!(row.status, RowStatus::Pass);
    assert_eq!(row.bound, 1.0);
    assert!(row.estimate.unwrap().agrees_with(0.5, 4.0));
    assert!(matches!(ville_check(&noisy_rm(), 1.0, &McConfig::new(10, 10, 2).unwrap()), Err(Error::Contract(_))));
}

#[test]
fn rows_beyond_the_horizon_are_infeasible() {
    let m = noisy_rm();
    let bundle = RateBundle {
        rho: stochrate::RateFn::new("huge", |_| 1_000_000),
        rho_as: RateAsFn::new("huge", |_, _| 1_000_000),
        provenance: "huge".into(),
    };
    let cfg = McConfig::new(100, 1000, 4).unwrap();
    let rows = validate_mean_rate(&m, &sicc_identity(), &bundle, &[0.5], &cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].status, RowStatus::Infeasible);
    assert!(rows[0].estimate.is_none());
    let rows = validate_as_rate(&m, &bundle.rho_as, &[(0.1, 0.5)], &cfg).unwrap();
    assert_eq!(rows[0].status, RowStatus::Infeasible);
}

#[test]
fn rate_rows_on_a_noiseless_contraction() {
    // E[X_n] = 2^{-n} exactly; the rs rate with θ linear in the window mass
    let m = noiseless_km();
    let spec = stochrate::rates::RsSpec {
        k: 1.0,
        l: 1.0,
        m: 0.0,
        chi: stochrate::TailRate::zero(),
        theta: stochrate::DivergenceRate::linear(0.5),
        tau: stochrate::RegularityModulus::poly(0.5, 1.0),
        f: sicc_identity(),
    };
    let bundle = rate_rs(&spec).unwrap();
    let cfg = McConfig::new(10, 200, 4).unwrap();
    let rows = validate_mean_rate(&m, &sicc_identity(), &bundle, &[0.5, 0.1], &cfg).unwrap();
    assert!(rows.iter().all(|r| r.passed()), "{rows:?}");
    assert!(rows.iter().any(|r| r.kind == "mean-spot"));
    let rows = validate_fast_bound(&m, &|n| 0.5f64.powi(n as i32), &[0, 3, 9], &cfg).unwrap();
    assert!(rows.iter().all(|r| r.passed()));
    let rows = validate_fast_bound(&m, &|n| 0.4 * 0.5f64.powi(n as i32), &[3], &cfg).unwrap();
    assert_eq!(rows[0].status, RowStatus::Fail);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimates_are_reproducible(seed in any::<u64>(), n in 0u128..30) {
        let m = noisy_rm();
        let cfg = McConfig::new(64, 30, seed).unwrap();
        let g = |x: &StatePoint| m.target_dist(x);
        let a = estimate_mean_functional(&m, &g, n, &cfg).unwrap();
        let b = estimate_mean_functional(&m, &g, n, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn estimate_statistics(xs in prop::collection::vec(-100.0f64..100.0, 2..200)) {
        let e = EstimateWithCI::from_samples(&xs);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((e.mean - mean).abs() <= 1e-9 * mean.abs().max(1.0));
        prop_assert!(e.std_err >= 0.0);
        prop_assert!(e.dominated_by(e.mean, 0.0));
        prop_assert!(e.agrees_with(e.mean + e.std_err, 1.0 + 1e-9));
    }
}
