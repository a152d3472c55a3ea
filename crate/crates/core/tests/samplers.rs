use hardedge::samplers::{
    rejection_acceptance_rate, sample_bessel_batch, sample_conditioned_exact, sample_conditioned_exact_batch,
    sample_conditioned_rejection, sample_conditioned_rejection_batch, sample_limit_batch, sample_limit_sde,
    uniform_grid, RejectionConfig, RngSpec, SamplerKind, SdeConfig,
};
use hardedge::specfun::BesselParams;
use hardedge::stats::{ks_one_sample, ks_two_sample};
use hardedge::verify::{check_montecarlo_marginals, CdfTable};
use hardedge::{Error, SpectralKernel};

fn kernel(d: f64) -> SpectralKernel {
    SpectralKernel::with_dimension(d).unwrap()
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn free_second_moment_grows_by_d_t() {
    // E[Y_t²] = x0² + d t for the squared Bessel process.
    for d in [2.0, 3.0, 7.0] {
        let p = BesselParams::new(d).unwrap();
        let (x0, t) = (0.5, 0.5);
        let paths = sample_bessel_batch(x0, &[0.0, t], &p, &SdeConfig::default(), 11, 20_000).unwrap();
        let sq: Vec<f64> = paths.iter().map(|p| p.last().powi(2)).collect();
        let (m, v) = mean_var(&sq);
        let want = x0 * x0 + d * t;
        assert!((m - want).abs() < 4.0 * (v / sq.len() as f64).sqrt(), "d {d}: {m} vs {want}");
    }
}

#[test]
fn exact_marginals_follow_the_conditioned_density() {
    let k = kernel(2.0);
    for n in [1.5, f64::INFINITY] {
        let r = check_montecarlo_marginals(&k, SamplerKind::Exact, 20_000, 0.7, n, 0.3, 5);
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn exact_two_step_path_matches_single_step_law() {
    // Chaining two half steps must reproduce the law of one full step.
    let k = kernel(3.0);
    let (x0, t, n) = (0.6, 0.8, 2.0);
    let chained: Vec<f64> = sample_conditioned_exact_batch(x0, &[0.0, 0.4, t], n, &k, 3, 20_000)
        .unwrap()
        .iter()
        .map(|p| p.last())
        .collect();
    let (table, mass) = CdfTable::from_density(0.0, 1.0, 4000, |y| k.conditioned_density_finite_n(x0, y, t, n)).unwrap();
    assert!((mass - 1.0).abs() < 1e-8);
    let ks = ks_one_sample(&chained, |y| table.cdf(y)).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn batches_match_single_streams() {
    let k = kernel(2.0);
    let grid = uniform_grid(1.0, 5).unwrap();
    let batch = sample_conditioned_exact_batch(0.4, &grid, 3.0, &k, 17, 6).unwrap();
    for (i, path) in batch.iter().enumerate() {
        let single = sample_conditioned_exact(0.4, &grid, 3.0, &k, RngSpec::new(17, i as u64)).unwrap();
        assert_eq!(path.values, single.values);
        assert_eq!(path.meta.stream, i as u64);
    }
    let other = sample_conditioned_exact_batch(0.4, &grid, 3.0, &k, 18, 6).unwrap();
    assert_ne!(batch[0].values, other[0].values);
}

#[test]
fn reruns_are_identical() {
    let k = kernel(3.0);
    let p = BesselParams::new(3.0).unwrap();
    let grid = uniform_grid(0.5, 4).unwrap();
    let sde = SdeConfig::default();
    let a = sample_limit_batch(0.5, &grid, &k, &sde, 9, 50).unwrap();
    let b = sample_limit_batch(0.5, &grid, &k, &sde, 9, 50).unwrap();
    assert_eq!(a, b);
    let a = sample_bessel_batch(0.5, &grid, &p, &sde, 9, 50).unwrap();
    let b = sample_bessel_batch(0.5, &grid, &p, &sde, 9, 50).unwrap();
    assert_eq!(a, b);
    let rc = RejectionConfig::default();
    let a = sample_conditioned_rejection_batch(0.5, &grid, 0.3, &p, &rc, 9, 50).unwrap();
    let b = sample_conditioned_rejection_batch(0.5, &grid, 0.3, &p, &rc, 9, 50).unwrap();
    assert_eq!(a, b);
}

#[test]
fn paths_stay_in_their_state_space() {
    let k = kernel(2.0);
    let p = BesselParams::new(2.0).unwrap();
    let grid = uniform_grid(2.0, 20).unwrap();
    for path in sample_limit_batch(0.05, &grid, &k, &SdeConfig::default(), 1, 200).unwrap() {
        assert!(path.values[1..].iter().all(|&v| v > 0.0 && v < 1.0));
    }
    for path in sample_conditioned_exact_batch(0.95, &grid, 4.0, &k, 1, 200).unwrap() {
        assert!(path.values[1..].iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
    let rc = RejectionConfig::default();
    let (paths, _) = sample_conditioned_rejection_batch(0.5, &grid[..6], 0.5, &p, &rc, 1, 100).unwrap();
    for path in paths {
        assert!(path.values.iter().all(|&v| v > 0.0 && v < 1.0));
    }
    for path in sample_bessel_batch(0.5, &grid, &p, &SdeConfig::default(), 1, 200).unwrap() {
        assert!(path.values.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn rejection_without_conditioning_is_a_free_path() {
    let p = BesselParams::new(3.0).unwrap();
    let grid = uniform_grid(0.2, 2).unwrap();
    let (paths, est) = sample_conditioned_rejection_batch(0.5, &grid, 0.0, &p, &RejectionConfig::default(), 4, 100).unwrap();
    assert_eq!((est.attempts, est.accepted), (100, 100));
    assert!(paths.iter().any(|p| p.values.iter().any(|&v| v > 1.0)));
    let single = sample_conditioned_rejection(0.5, &grid, 0.0, &p, &RejectionConfig::default(), RngSpec::new(4, 0)).unwrap();
    assert_eq!(single.meta.attempts, 1);
    assert_eq!(single.meta.sampler, SamplerKind::Rejection);
}

#[test]
fn acceptance_rate_matches_survival() {
    for d in [2.0, 4.0] {
        let k = kernel(d);
        let (x0, n) = (0.4, 0.3);
        let s = k.survival(x0, n).unwrap();
        let est = rejection_acceptance_rate(x0, n, k.params(), &SdeConfig::default(), 21, 40_000).unwrap();
        let z = (est.rate - s).abs() / est.std_error(s);
        assert!(z < 3.0, "d {d}: rate {} survival {s} z {z}", est.rate);
    }
}

#[test]
fn rejection_and_exact_agree_at_short_horizon() {
    let k = kernel(2.0);
    let grid = [0.0, 0.3];
    let exact: Vec<f64> = sample_conditioned_exact_batch(0.5, &grid, 0.6, &k, 2, 15_000)
        .unwrap()
        .iter()
        .map(|p| p.last())
        .collect();
    let (paths, _) =
        sample_conditioned_rejection_batch(0.5, &grid, 0.6, k.params(), &RejectionConfig::default(), 3, 15_000).unwrap();
    let rejected: Vec<f64> = paths.iter().map(|p| p.last()).collect();
    let ks = ks_two_sample(&exact, &rejected).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn exhausted_budget_reports_the_rate() {
    let p = BesselParams::new(3.0).unwrap();
    let rc = RejectionConfig {
        max_attempts: 2000,
        ..Default::default()
    };
    let err = sample_conditioned_rejection_batch(0.5, &[0.0, 1.0], 4.0, &p, &rc, 1, 10).unwrap_err();
    assert!(matches!(err, Error::AttemptsExhausted { attempts: 2000, .. }), "{err}");
    let err = sample_conditioned_rejection(0.5, &[0.0, 1.0], 4.0, &p, &rc, RngSpec::new(1, 0)).unwrap_err();
    assert!(matches!(err, Error::AttemptsExhausted { .. }));
}

#[test]
fn invalid_inputs_are_rejected() {
    let k = kernel(2.0);
    let p = BesselParams::new(2.0).unwrap();
    let sde = SdeConfig::default();
    assert!(uniform_grid(1.0, 0).is_err());
    assert!(sample_conditioned_exact(1.5, &[0.0, 1.0], 2.0, &k, RngSpec::new(0, 0)).is_err());
    assert!(sample_conditioned_exact(0.5, &[0.0, 0.5, 0.2], 2.0, &k, RngSpec::new(0, 0)).is_err());
    assert!(sample_bessel_batch(-0.1, &[0.0, 1.0], &p, &sde, 0, 1).is_err());
    assert!(sample_limit_sde(0.0, &[0.0, 1.0], &k, &sde, RngSpec::new(0, 0)).is_err());
    let coarse = SdeConfig {
        max_step: 0.05,
        ..sde
    };
    assert!(sample_limit_sde(0.5, &[0.0, 1.0], &k, &coarse, RngSpec::new(0, 0)).is_err());
    assert!("gibbs".parse::<SamplerKind>().is_err());
    assert_eq!("limit".parse::<SamplerKind>().unwrap(), SamplerKind::Limit);
}

#[test]
fn coarse_free_steps_carry_a_warning() {
    let p = BesselParams::new(2.0).unwrap();
    let coarse = SdeConfig {
        max_step: 0.05,
        ..Default::default()
    };
    let paths = sample_bessel_batch(0.5, &[0.0, 0.1], &p, &coarse, 0, 1).unwrap();
    assert!(paths[0].meta.warning.is_some());
    let fine = sample_bessel_batch(0.5, &[0.0, 0.1], &p, &SdeConfig::default(), 0, 1).unwrap();
    assert!(fine[0].meta.warning.is_none());
}
