use hardedge::kernels::{DensityKind, KernelConfig, SpectralKernel};
use hardedge::quad::CompositeRule;
use hardedge::specfun::BesselParams;
use hardedge::Error;
use std::f64::consts::PI;

fn kernel(d: f64) -> SpectralKernel {
    SpectralKernel::with_dimension(d).unwrap()
}

fn sine_kernel(x: f64, y: f64, t: f64) -> f64 {
    (1..2000)
        .map(|k| {
            let kp = k as f64 * PI;
            2.0 * (kp * x).sin() * (kp * y).sin() * (-0.5 * kp * kp * t).exp()
        })
        .sum()
}

fn interior(n: usize) -> Vec<f64> {
    (1..n).map(|i| i as f64 / n as f64).collect()
}

#[test]
fn killed_matches_sine_series_in_three_dimensions() {
    let k = kernel(3.0);
    for t in [0.1, 0.5, 2.0] {
        for &x in &interior(10) {
            for &y in &interior(10) {
                let want = y / x * sine_kernel(x, y, t);
                let got = k.killed_density(x, y, t).unwrap();
                assert!((got - want).abs() < 1e-10, "x {x} y {y} t {t}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn survival_matches_alternating_series() {
    let k = kernel(3.0);
    for t in [0.1, 1.0] {
        for &x in &interior(10) {
            let want: f64 = (1..2000)
                .map(|j| {
                    let kf = j as f64;
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    sign / kf * (kf * PI * x).sin() * (-0.5 * kf * kf * PI * PI * t).exp()
                })
                .sum::<f64>()
                * 2.0
                / (PI * x);
            assert!((k.survival(x, t).unwrap() - want).abs() < 1e-10);
        }
    }
}

#[test]
fn limit_matches_taboo_kernel() {
    let k = kernel(3.0);
    for t in [0.1, 0.7] {
        for &x in &interior(8) {
            for &y in &interior(8) {
                let want = (0.5 * PI * PI * t).exp() * (PI * y).sin() / (PI * x).sin() * sine_kernel(x, y, t);
                let got = k.limit_density(x, y, t).unwrap();
                assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "x {x} y {y} t {t}");
            }
        }
    }
}

#[test]
fn free_density_matches_reflected_gaussian() {
    let k = kernel(3.0);
    let phi = |z: f64, t: f64| (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
    for t in [0.01, 0.3, 2.0] {
        for &x in &[0.1, 0.5, 1.3] {
            for &y in &[0.05, 0.5, 0.9, 2.0] {
                let want = y / x * (phi(y - x, t) - phi(y + x, t));
                let got = k.free_density(x, y, t).unwrap();
                assert!((got - want).abs() < 1e-12 * want.max(1.0), "{x} {y} {t}: {got} {want}");
            }
        }
    }
}

#[test]
fn stationary_density_is_squared_sine_in_three_dimensions() {
    let k = kernel(3.0);
    for &y in &interior(50) {
        let want = 2.0 * (PI * y).sin().powi(2);
        assert!((k.stationary_density(y) - want).abs() < 1e-13);
    }
}

#[test]
fn normalization_of_limit_kernel() {
    for d in [2.0, 3.0, 4.5, 12.0] {
        let k = kernel(d);
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for t in [0.1, 1.0, 5.0] {
                let mass = k.total_mass(DensityKind::Limit, x, t, f64::INFINITY).unwrap();
                assert!((mass - 1.0).abs() < 1e-8, "d {d} x {x} t {t}: {mass}");
            }
        }
        let mass = k.total_mass(DensityKind::Stationary, 0.0, 1.0, 0.0).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
    }
}

#[test]
fn survival_equals_integral_of_killed_kernel() {
    for d in [2.0, 3.0, 7.0] {
        let k = kernel(d);
        for x in [0.1, 0.5, 0.9] {
            for t in [0.05, 0.5, 2.0] {
                let mass = k.total_mass(DensityKind::Killed, x, t, 0.0).unwrap();
                assert!(mass <= 1.0 + 1e-12);
                assert!((mass - k.survival(x, t).unwrap()).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn survival_decreases_in_time() {
    let k = kernel(2.0);
    let mut prev = 1.0;
    for i in 1..50 {
        let s = k.survival(0.4, i as f64 * 0.05).unwrap();
        assert!(s < prev && s > 0.0);
        prev = s;
    }
}

#[test]
fn eigenrelation_holds() {
    for d in [2.0, 3.0] {
        let k = kernel(d);
        for i in 0..5 {
            for t in [0.1, 0.5, 1.0, 2.0] {
                for g in 0..=20 {
                    let x = (g as f64 / 20.0).clamp(1e-6, 1.0 - 1e-6);
                    let lhs = k.killed_expectation(x, t, |y| k.eigenfunction(i, y).unwrap()).unwrap();
                    let j = k.table().zeros()[i];
                    let rhs = (-0.5 * j * j * t).exp() * k.eigenfunction(i, x).unwrap();
                    assert!((lhs - rhs).abs() < 1e-7, "d {d} i {i} t {t} x {x}");
                }
            }
        }
    }
}

#[test]
fn chapman_kolmogorov_on_closed_interval() {
    for d in [2.0, 3.0] {
        let k = kernel(d);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for (t, s) in [(0.2, 0.3), (0.5, 0.5), (1.0, 2.0)] {
            for &x in &grid {
                let row = k.limit_row(x, t).unwrap();
                for &y in &grid[1..10] {
                    let col = k.limit_column(y, s).unwrap();
                    let prod: Vec<f64> = row.iter().zip(&col).map(|(a, b)| a * b).collect();
                    let lhs = k.rule().sum_tabulated(&prod);
                    let rhs = k.limit_density(x, y, t + s).unwrap();
                    assert!((lhs - rhs).abs() < 1e-6, "d {d} ({t},{s}) x {x} y {y}");
                }
            }
        }
    }
}

#[test]
fn stationarity_under_the_semigroup() {
    for d in [2.0, 3.0] {
        let k = kernel(d);
        for t in [0.5, 2.0] {
            for g in 0..=40 {
                let y = g as f64 / 40.0;
                let col = k.limit_column(y, t).unwrap();
                let vals: Vec<f64> = k
                    .rule()
                    .nodes()
                    .iter()
                    .zip(&col)
                    .map(|(&x, q)| k.stationary_density(x) * q)
                    .collect();
                let lhs = k.rule().sum_tabulated(&vals);
                assert!((lhs - k.stationary_density(y)).abs() < 1e-8, "d {d} t {t} y {y}");
            }
        }
    }
}

#[test]
fn long_time_limit_is_stationary() {
    for d in [2.0, 3.0] {
        let k = kernel(d);
        for x in [0.0, 0.3, 1.0] {
            for &y in &interior(10) {
                let q = k.limit_density(x, y, 20.0).unwrap();
                assert!((q - k.stationary_density(y)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn reversible_symmetry() {
    for d in [2.0, 3.0, 6.0] {
        let k = kernel(d);
        let a = k.alpha();
        for &x in &interior(7) {
            for &y in &interior(7) {
                let sxy = k.killed_density(x, y, 0.3).unwrap() * x.powf(a) / y.powf(a + 1.0);
                let syx = k.killed_density(y, x, 0.3).unwrap() * y.powf(a) / x.powf(a + 1.0);
                assert!((sxy - syx).abs() < 1e-10 * sxy.abs().max(1.0));
            }
        }
    }
}

#[test]
fn free_dominates_killed() {
    for d in [2.0, 3.0, 5.0] {
        let k = kernel(d);
        for &x in &interior(6) {
            for &y in &interior(6) {
                for t in [0.01, 0.3] {
                    let free = k.free_density(x, y, t).unwrap();
                    let killed = k.killed_density(x, y, t).unwrap();
                    assert!(free >= killed - 1e-12, "{d} {x} {y} {t}");
                }
            }
        }
    }
}

#[test]
fn free_density_integrates_to_one() {
    for d in [2.0, 3.0, 10.0] {
        let k = kernel(d);
        for (x, t) in [(0.5, 0.1), (0.2, 1.0), (0.9, 0.01)] {
            let mass = k.total_mass(DensityKind::Free, x, t, 0.0).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "d {d}: {mass}");
        }
    }
}

#[test]
fn conditioned_density_is_normalized_and_converges() {
    for d in [2.0, 3.0] {
        let k = kernel(d);
        for n in [1.0, 3.0, 300.0] {
            let mass = k.total_mass(DensityKind::Conditioned, 0.4, 0.5, n).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "d {d} n {n}: {mass}");
        }
        for &y in &interior(10) {
            let far = k.conditioned_density_finite_n(0.4, y, 0.5, 400.0).unwrap();
            let lim = k.limit_density(0.4, y, 0.5).unwrap();
            assert!((far - lim).abs() < 1e-10);
        }
    }
}

#[test]
fn difference_form_matches_direct_subtraction() {
    let k = kernel(2.0);
    for n in [0.8, 1.5] {
        for &y in &interior(10) {
            let direct = k.conditioned_density_finite_n(0.3, y, 0.5, n).unwrap() - k.limit_density(0.3, y, 0.5).unwrap();
            let stable = k.conditioned_minus_limit(0.3, y, 0.5, n).unwrap();
            assert!((direct - stable).abs() < 1e-11, "n {n} y {y}");
        }
    }
}

#[test]
fn drift_finite_difference_and_signs() {
    for d in [2.0, 3.0, 8.0] {
        let k = kernel(d);
        let j1 = k.j1();
        let a = k.alpha();
        let logf = |x: f64| 0.5 * x.ln() + hardedge::specfun::bessel_j(a, j1 * x).unwrap().abs().ln();
        for &x in &interior(20) {
            let h = 1e-5;
            let fd = (logf(x + h) - logf(x - h)) / (2.0 * h);
            let b = k.limit_drift(x).unwrap();
            assert!((fd - b).abs() < 1e-6 * b.abs().max(1.0), "d {d} x {x}");
        }
        assert!(k.limit_drift(0.01).unwrap() > 0.0);
        assert!(k.limit_drift(0.99).unwrap() < 0.0);
    }
}

#[test]
fn boundary_starts_are_continuous() {
    for d in [2.0, 3.0, 5.0] {
        let k = kernel(d);
        for &y in &interior(10) {
            for (edge, near) in [(0.0, 1e-7), (1.0, 1.0 - 1e-7)] {
                let a = k.limit_density(edge, y, 0.3).unwrap();
                let b = k.limit_density(near, y, 0.3).unwrap();
                assert!((a - b).abs() < 1e-5 * a.abs().max(1.0), "d {d} edge {edge} y {y}");
            }
        }
    }
}

#[test]
fn high_order_kernel_is_normalized() {
    let k = kernel(102.0);
    for x in [0.0, 0.5, 1.0] {
        let mass = k.total_mass(DensityKind::Limit, x, 0.1, f64::INFINITY).unwrap();
        assert!((mass - 1.0).abs() < 1e-8, "x {x}: {mass}");
    }
}

#[test]
fn tail_tolerance_is_honoured_by_truncation() {
    let params = BesselParams::new(2.0).unwrap();
    let loose = SpectralKernel::new(params, KernelConfig { tail_tol: 1e-6, ..Default::default() }).unwrap();
    let tight = kernel(2.0);
    assert!(loose.terms(0.01, false).unwrap() < tight.terms(0.01, false).unwrap());
    for &y in &interior(10) {
        let a = loose.killed_density(0.5, y, 0.01).unwrap();
        let b = tight.killed_density(0.5, y, 0.01).unwrap();
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn rule_integrates_stationary_against_one() {
    let rule = CompositeRule::unit(64);
    let k = kernel(2.0);
    assert!((rule.integrate(|y| k.stationary_density(y)) - 1.0).abs() < 1e-12);
}

#[test]
fn error_paths() {
    let k = kernel(2.0);
    assert!(matches!(k.limit_density(0.5, 0.5, 1e-5), Err(Error::SeriesRegime { .. })));
    assert!(matches!(k.conditioned_density_finite_n(0.5, 0.5, 1.0, 0.5), Err(Error::Domain { .. })));
    assert!(matches!(k.free_density(-1.0, 0.5, 1.0), Err(Error::Domain { .. })));
    assert_eq!(k.free_density(1.0, 1e6, 1e-3).unwrap(), 0.0);
    assert!(k.evaluate(DensityKind::Free, 0.5, 0.5, 1.0, 0.0).is_ok());
}
