//! Three-dimensional checks against trigonometric closed forms.
//!
//! At `d = 3` the zeros are `kπ`, the killed process is Brownian motion killed at
//! 0 and 1 transformed by `h(x) = x`, and the limit is Brownian motion tabooed
//! in `(0, 1)`.

use super::{params, run_check, VerificationReport};
use crate::error::Result;
use crate::kernels::SpectralKernel;
use std::f64::consts::PI;

/// Terms `k` with `e^{−k²π²t/2}` above `1e-18`.
fn sine_terms(t: f64) -> usize {
    ((2.0 * 18.0 * 10f64.ln() / (PI * PI * t)).sqrt().ceil() as usize + 1).max(2)
}

/// Transition density of Brownian motion killed on leaving `(0, 1)`.
pub fn dirichlet_sine_kernel(x: f64, y: f64, t: f64) -> f64 {
    (1..=sine_terms(t))
        .map(|k| {
            let kp = k as f64 * PI;
            2.0 * (kp * x).sin() * (kp * y).sin() * (-0.5 * kp * kp * t).exp()
        })
        .sum()
}

/// Brownian motion conditioned to stay in `(0, 1)` forever.
pub fn taboo_kernel(x: f64, y: f64, t: f64) -> f64 {
    (PI * y).sin() / (PI * x).sin() * (0.5 * PI * PI * t).exp() * dirichlet_sine_kernel(x, y, t)
}

fn killed(x: f64, y: f64, t: f64) -> f64 {
    y / x * dirichlet_sine_kernel(x, y, t)
}

fn survival(x: f64, t: f64) -> f64 {
    (1..=sine_terms(t))
        .map(|k| {
            let kp = k as f64 * PI;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            2.0 * sign * (kp * x).sin() / (kp * x) * (-0.5 * kp * kp * t).exp()
        })
        .sum()
}

fn free(x: f64, y: f64, t: f64) -> f64 {
    let g = |z: f64| (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
    y / x * (g(y - x) - g(y + x))
}

fn interior(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

fn sup_over(pairs: &[(f64, f64)], f: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(x, y) in pairs {
        worst = worst.max(f(x, y)?);
    }
    Ok(worst)
}

/// Every `d = 3` closed-form comparison, at `1e-10` (the Chapman–Kolmogorov one at `1e-9`).
pub fn check_d3_closed_forms() -> Vec<VerificationReport> {
    let kernel = match SpectralKernel::with_dimension(3.0) {
        Ok(k) => k,
        Err(e) => return vec![VerificationReport::failed("d3_setup", "d=3", &e)],
    };
    let k = &kernel;
    let ts = [0.1, 0.5, 1.0, 2.0];
    let pts = interior(9);
    let square: Vec<(f64, f64)> = pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y))).collect();
    let p = |extra: &str| params(&[("d", "3".into()), ("t", "0.1;0.5;1;2".into()), ("grid", extra.into())]);
    let mut out = Vec::new();

    out.push(run_check("d3_killed", p("9x9"), || {
        let mut worst: f64 = 0.0;
        for &t in &ts {
            worst = worst.max(sup_over(&square, |x, y| Ok((k.killed_density(x, y, t)? - killed(x, y, t)).abs()))?);
        }
        Ok(VerificationReport::new("d3_killed", p("9x9"), worst, 1e-10))
    }));
    out.push(run_check("d3_survival", p("9"), || {
        let mut worst: f64 = 0.0;
        for &t in &ts {
            for &x in &pts {
                worst = worst.max((k.survival(x, t)? - survival(x, t)).abs());
            }
        }
        Ok(VerificationReport::new("d3_survival", p("9"), worst, 1e-10))
    }));
    out.push(run_check("d3_limit", p("9x9"), || {
        let mut worst: f64 = 0.0;
        for &t in &ts {
            worst = worst.max(sup_over(&square, |x, y| Ok((k.limit_density(x, y, t)? - taboo_kernel(x, y, t)).abs()))?);
        }
        Ok(VerificationReport::new("d3_limit", p("9x9"), worst, 1e-10))
    }));
    out.push(run_check("d3_free", p("9x9"), || {
        let mut worst: f64 = 0.0;
        for &t in &ts {
            worst = worst.max(sup_over(&square, |x, y| Ok((k.free_density(x, y, t)? - free(x, y, t)).abs()))?);
        }
        Ok(VerificationReport::new("d3_free", p("9x9"), worst, 1e-10))
    }));
    let pd = params(&[("d", "3".into()), ("grid", "99".into())]);
    out.push(run_check("d3_drift", pd.clone(), || {
        let mut worst: f64 = 0.0;
        for x in interior(99) {
            let want = PI / (PI * x).tan();
            worst = worst.max((k.limit_drift(x)? - want).abs() / want.abs().max(1.0));
        }
        Ok(VerificationReport::new("d3_drift", pd.clone(), worst, 1e-10))
    }));
    let ps = params(&[("d", "3".into()), ("grid", "101".into())]);
    out.push(run_check("d3_stationary", ps.clone(), || {
        let mut worst: f64 = 0.0;
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            let s = (PI * y).sin();
            worst = worst.max((k.stationary_density(y) - 2.0 * s * s).abs());
        }
        Ok(VerificationReport::new("d3_stationary", ps.clone(), worst, 1e-10))
    }));
    let pe = params(&[("d", "3".into()), ("i_max", "5".into()), ("t", "0.1;0.5;1;2".into()), ("grid", "21".into())]);
    out.push(run_check("d3_eigenrelation", pe.clone(), || {
        let mut worst: f64 = 0.0;
        for &t in &ts {
            for i in 1..=5 {
                let kp = i as f64 * PI;
                // h_i(x) = x^{-1/2} J_{1/2}(kπx) = √(2/(kπ²)) sin(kπx)/x
                let c = (2.0 / (i as f64 * PI * PI)).sqrt();
                let h = |x: f64| c * (kp * x).sin() / x;
                for x in (0..21).map(|q| 0.025 + 0.95 * q as f64 / 20.0) {
                    let lhs = k.killed_expectation(x, t, h)?;
                    worst = worst.max((lhs - (-0.5 * kp * kp * t).exp() * h(x)).abs());
                }
            }
        }
        Ok(VerificationReport::new("d3_eigenrelation", pe.clone(), worst, 1e-10))
    }));
    let pc = params(&[("d", "3".into()), ("t;s", "0.2;0.3|0.5;0.5|1;2".into()), ("grid", "9x9".into())]);
    out.push(run_check("d3_chapman_kolmogorov", pc.clone(), || {
        let w = k.rule().weights();
        let mut worst: f64 = 0.0;
        for (t, s) in [(0.2, 0.3), (0.5, 0.5), (1.0, 2.0)] {
            for &x in &pts {
                let row = k.limit_row(x, t)?;
                for &y in &pts {
                    let col = k.limit_column(y, s)?;
                    let lhs: f64 = row.iter().zip(&col).zip(w).map(|((a, b), w)| a * b * w).sum();
                    worst = worst.max((lhs - taboo_kernel(x, y, t + s)).abs());
                }
            }
        }
        Ok(VerificationReport::new("d3_chapman_kolmogorov", pc.clone(), worst, 1e-9))
    }));
    out
}
