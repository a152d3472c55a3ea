use hardedge::verify::{
    check_d3_closed_forms, check_doob_form, check_generator, fourier_bessel_error, generator_estimates,
    reports_to_json, richardson_to_zero, run_suite, taboo_kernel, Suite, TestFunction, VerificationReport,
    VerifyConfig, CHECK_NAMES, J0_ZEROS,
};
use hardedge::{BesselParams, Error, KernelConfig, SpectralKernel};

fn kernel(d: f64) -> SpectralKernel {
    SpectralKernel::with_dimension(d).unwrap()
}

fn deterministic() -> Vec<Suite> {
    ["zeros", "eigenrelation", "normalization", "chapman_kolmogorov", "doob_form", "convergence_rate", "stationarity", "fourier_bessel"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

#[test]
fn deterministic_checks_pass_across_dimensions() {
    for d in [3.0, 5.0, 9.0] {
        let k = kernel(d);
        let cfg = VerifyConfig {
            d,
            ..Default::default()
        };
        for suite in deterministic() {
            for r in run_suite(&suite, &cfg, &k) {
                assert!(r.passed, "d {d}: {r:?}");
            }
        }
    }
}

#[test]
fn d3_oracle_is_all_green() {
    let reports = check_d3_closed_forms();
    assert_eq!(reports.len(), 8);
    for r in reports {
        assert!(r.passed && r.residual < 1e-12, "{r:?}");
    }
    let k = kernel(3.0);
    assert_eq!(run_suite(&Suite::D3Oracle, &VerifyConfig::default(), &k).len(), 8);
}

#[test]
fn taboo_kernel_is_a_probability_density() {
    for (x, t) in [(0.1, 0.2), (0.5, 1.0), (0.9, 3.0)] {
        let m = 4000;
        let mass: f64 = (0..m).map(|i| taboo_kernel(x, (i as f64 + 0.5) / m as f64, t)).sum::<f64>() / m as f64;
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }
}

#[test]
fn generator_of_smooth_modes_converges() {
    // cos(πx) has the smallest curvature of the default class; it meets the tolerance.
    let cos_pi = TestFunction::defaults()[1];
    for d in [2.0, 3.0] {
        let k = kernel(d);
        let reports = check_generator(&k, &cos_pi, &[0.004, 0.002, 0.001]);
        assert!(reports.iter().all(|r| r.passed), "d {d}: {reports:?}");
        assert!(check_doob_form(&k, &cos_pi).passed);
    }
}

#[test]
fn generator_tolerance_is_met_at_smaller_times() {
    // The default times leave a boundary layer of width ~√t; a decade lower it is gone.
    for d in [2.0, 3.0] {
        let cfg = KernelConfig {
            t_min: 1e-5,
            max_terms: 4000,
            ..Default::default()
        };
        let k = SpectralKernel::new(BesselParams::new(d).unwrap(), cfg).unwrap();
        for f in TestFunction::defaults() {
            let reports = check_generator(&k, &f, &[4e-4, 2e-4, 1e-4]);
            assert!(reports.iter().all(|r| r.passed), "d {d} {}: {reports:?}", f.name);
        }
    }
}

#[test]
fn generator_errors_shrink_with_time() {
    let k = kernel(3.0);
    let bump = TestFunction::defaults()[2];
    let est = generator_estimates(&k, &bump, &[0.004, 0.002, 0.001]).unwrap();
    let errs: Vec<f64> = est.iter().map(|e| e.sup_error()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn neville_removes_polynomial_error() {
    let ts = [0.4, 0.2, 0.1, 0.05];
    let v: Vec<f64> = ts.iter().map(|t| 3.0 - 2.0 * t + 5.0 * t * t - t * t * t).collect();
    assert!((richardson_to_zero(&ts, &v) - 3.0).abs() < 1e-12);
}

#[test]
fn frozen_order_zero_zeros_vanish() {
    for z in J0_ZEROS {
        assert!(hardedge::specfun::bessel_j(0.0, z).unwrap().abs() < 1e-14);
    }
}

#[test]
fn fourier_bessel_error_decreases() {
    let alpha = 0.5;
    let f = |x: f64| x.powf(alpha) * (1.0 - x * x);
    let errs: Vec<f64> = [5, 10, 25, 50].iter().map(|&k| fourier_bessel_error(alpha, f, k).unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < 1e-2);
}

#[test]
fn single_checks_run_alone() {
    let k = kernel(2.0);
    let cfg = VerifyConfig::default();
    let reports = run_suite(&"stationarity".parse().unwrap(), &cfg, &k);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].name, "stationarity");
    assert!(run_suite(&Suite::None, &cfg, &k).is_empty());
    assert_eq!(CHECK_NAMES.len(), 16);
    assert!(matches!("all".parse::<Suite>(), Err(Error::Config { .. })));
}

#[test]
fn json_reports_are_flat_and_deterministic() {
    let reports = vec![
        VerificationReport::new("a", "d=2", 1e-9, 1e-8),
        VerificationReport::new("b", "d=2", 1.0, 0.5).with_note("too large"),
    ];
    let json = reports_to_json(&reports, false).unwrap();
    assert_eq!(json, reports_to_json(&reports, false).unwrap());
    let parsed: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed[0]["passed"], true);
    assert_eq!(parsed[1]["passed"], false);
    assert_eq!(parsed[1]["note"], "too large");
    for obj in &parsed {
        assert!(obj.as_object().unwrap().values().all(|v| !v.is_object() && !v.is_array()));
    }
}
