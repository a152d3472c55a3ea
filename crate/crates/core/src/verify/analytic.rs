//! Deterministic checks of the spectral identities.

use super::{params, run_check, TestFunction, VerificationReport};
use crate::error::{Error, Result};
use crate::kernels::SpectralKernel;
use crate::quad::CompositeRule;
use crate::specfun::{bessel_j, bessel_j_derivative, ZeroTable};
use std::f64::consts::PI;

/// First ten positive zeros of `J_0`, to double precision.
pub const J0_ZEROS: [f64; 10] = [
    2.404_825_557_695_772_8,
    5.520_078_110_286_310_6,
    8.653_727_912_911_012_2,
    11.791_534_439_014_282,
    14.930_917_708_487_786,
    18.071_063_967_910_923,
    21.211_636_629_879_259,
    24.352_471_530_749_303,
    27.493_479_132_040_255,
    30.634_606_468_431_975,
];

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Zeros of `J_{1/2}` against `kπ` (to `1e-12`) and of `J_0` against [`J0_ZEROS`] (to `1e-10`).
pub fn check_zeros() -> Vec<VerificationReport> {
    let ph = params(&[("alpha", "0.5".into()), ("count", "50".into())]);
    let half = run_check("zeros_half_order", ph.clone(), || {
        let table = ZeroTable::compute(0.5, 50, 1e-12)?;
        table.certify()?;
        let r = table
            .zeros()
            .iter()
            .enumerate()
            .map(|(k, z)| (z - (k + 1) as f64 * PI).abs())
            .fold(0.0, f64::max);
        Ok(VerificationReport::new("zeros_half_order", ph.clone(), r, 1e-12))
    });
    let pz = params(&[("alpha", "0".into()), ("count", "10".into())]);
    let zero = run_check("zeros_order_zero", pz.clone(), || {
        let table = ZeroTable::compute(0.0, 10, 1e-12)?;
        table.certify()?;
        let r = table
            .zeros()
            .iter()
            .zip(J0_ZEROS)
            .map(|(z, r)| (z - r).abs())
            .fold(0.0, f64::max);
        Ok(VerificationReport::new("zeros_order_zero", pz.clone(), r, 1e-10))
    });
    vec![half, zero]
}

/// `∫ h_i(y) R_t(x, y) dy = e^{−j_i² t/2} h_i(x)` for modes `1..=i_max` on 21 points of `(0, 1)`.
pub fn check_eigenrelation(kernel: &SpectralKernel, i_max: usize, ts: &[f64]) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("i_max", i_max.to_string()),
        ("t", list(ts)),
        ("x_points", "21".into()),
    ]);
    run_check("eigenrelation", p.clone(), || {
        let mut worst: f64 = 0.0;
        let xs = grid(0.025, 0.975, 21);
        for &t in ts {
            for i in 0..i_max {
                let j = kernel.mode_j(i);
                for &x in &xs {
                    let lhs = kernel.killed_expectation(x, t, |y| kernel.eigenfunction(i, y).unwrap_or(0.0))?;
                    let rhs = (-0.5 * j * j * t).exp() * kernel.eigenfunction(i, x)?;
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        Ok(VerificationReport::new("eigenrelation", p, worst, 1e-7))
    })
}

/// `|∫ Q_t(x, y) dy − 1|` for `x ∈ {0, 1/4, 1/2, 3/4, 1}`.
pub fn check_normalization(kernel: &SpectralKernel, ts: &[f64]) -> VerificationReport {
    let p = params(&[("d", kernel.params().d().to_string()), ("t", list(ts))]);
    run_check("normalization", p.clone(), || {
        let mut worst: f64 = 0.0;
        for &t in ts {
            for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let m = kernel.limit_expectation(x, t, |_| 1.0)?;
                worst = worst.max((m - 1.0).abs());
            }
        }
        Ok(VerificationReport::new("normalization", p, worst, 1e-8))
    })
}

/// `sup |∫ Q_t(x, z) Q_s(z, y) dz − Q_{t+s}(x, y)|` on an 11 × 11 grid of the closed square.
pub fn check_chapman_kolmogorov(kernel: &SpectralKernel, t: f64, s: f64) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("t", t.to_string()),
        ("s", s.to_string()),
        ("grid", "11x11".into()),
    ]);
    run_check("chapman_kolmogorov", p.clone(), || {
        let pts = grid(0.0, 1.0, 11);
        let w = kernel.rule().weights();
        let cols: Vec<Vec<f64>> = pts.iter().map(|&y| kernel.limit_column(y, s)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for &x in &pts {
            let row = kernel.limit_row(x, t)?;
            for (&y, col) in pts.iter().zip(&cols) {
                let lhs: f64 = row.iter().zip(col).zip(w).map(|((a, b), w)| a * b * w).sum();
                let rhs = kernel.limit_density(x, y, t + s)?;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        Ok(VerificationReport::new("chapman_kolmogorov", p, worst, 1e-6))
    })
}

/// Difference quotients `(Q_t f − f)/t − Lf` at one `t`, on 19 points of `[0.05, 0.95]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorEstimate {
    pub t: f64,
    pub xs: Vec<f64>,
    pub quotient: Vec<f64>,
    pub exact: Vec<f64>,
}

impl GeneratorEstimate {
    pub fn sup_error(&self) -> f64 {
        self.quotient
            .iter()
            .zip(&self.exact)
            .map(|(q, e)| (q - e).abs())
            .fold(0.0, f64::max)
    }
}

pub fn generator_estimates(kernel: &SpectralKernel, f: &TestFunction, ts: &[f64]) -> Result<Vec<GeneratorEstimate>> {
    let xs = grid(0.05, 0.95, 19);
    let exact: Vec<f64> = xs.iter().map(|&x| f.generator(kernel, x)).collect::<Result<_>>()?;
    ts.iter()
        .map(|&t| {
            let quotient = xs
                .iter()
                .map(|&x| Ok((kernel.limit_expectation(x, t, f.f)? - (f.f)(x)) / t))
                .collect::<Result<Vec<f64>>>()?;
            Ok(GeneratorEstimate {
                t,
                xs: xs.clone(),
                quotient,
                exact: exact.clone(),
            })
        })
        .collect()
}

/// Neville extrapolation to `t = 0` of values `v` sampled at `ts`.
pub fn richardson_to_zero(ts: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = ts.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (ts[i + m] * p[i] - ts[i] * p[i + 1]) / (ts[i + m] - ts[i]);
        }
    }
    p[0]
}

/// Generator identity `lim (Q_t f − f)/t = Lf`, extrapolated over the decreasing `ts`,
/// plus a second report on the first-order decay of the single-`t` error.
pub fn check_generator(kernel: &SpectralKernel, f: &TestFunction, ts: &[f64]) -> Vec<VerificationReport> {
    let d = kernel.params().d();
    let p = params(&[("d", d.to_string()), ("f", f.name.into()), ("t", list(ts))]);
    let mut out = Vec::new();
    let est = generator_estimates(kernel, f, ts);
    out.push(run_check("generator", p.clone(), || {
        if !f.satisfies_boundary_conditions() {
            return Err(Error::Verification(format!("{} violates f'(0) = f'(1) = 0", f.name)));
        }
        let est = est.as_ref().map_err(|e| Error::Verification(e.to_string()))?;
        let mut worst: f64 = 0.0;
        let mut at = f64::NAN;
        for k in 0..est[0].xs.len() {
            let v: Vec<f64> = est.iter().map(|e| e.quotient[k]).collect();
            let err = (richardson_to_zero(ts, &v) - est[0].exact[k]).abs();
            if err > worst || worst.is_nan() {
                worst = err;
                at = est[0].xs[k];
            }
        }
        let r = VerificationReport::new("generator", p.clone(), worst, 1e-4);
        Ok(if r.passed { r } else { r.with_note(format!("largest error at x = {at}")) })
    }));
    let pr = params(&[("d", d.to_string()), ("f", f.name.into()), ("t", list(ts))]);
    out.push(run_check("generator_rate", pr.clone(), || {
        let est = est.as_ref().map_err(|e| Error::Verification(e.to_string()))?;
        let errs: Vec<f64> = est.iter().map(GeneratorEstimate::sup_error).collect();
        // a vanishing error (f constant) has no rate to measure
        if errs.iter().all(|&e| e < 1e-9) {
            return Ok(VerificationReport::new("generator_rate", pr, 0.0, 0.5)
                .with_note("error below resolution at every t"));
        }
        // residual: worst |log(err ratio / t ratio)| against the allowed log 1.5
        let mut worst: f64 = 0.0;
        for w in 0..errs.len() - 1 {
            let ratio = errs[w] / errs[w + 1];
            let expected = ts[w] / ts[w + 1];
            worst = worst.max((ratio / expected).ln().abs());
        }
        Ok(VerificationReport::new("generator_rate", pr, worst, 1.5f64.ln())
            .with_note(format!("sup errors {}", list(&errs))))
    }));
    out
}

/// `Lf` through the drift against `h_1^{-1}(L_0 + j_1²/2)(h_1 f)` through `J_α'` on 19 interior points.
pub fn check_doob_form(kernel: &SpectralKernel, f: &TestFunction) -> VerificationReport {
    let p = params(&[("d", kernel.params().d().to_string()), ("f", f.name.into())]);
    run_check("doob_form", p.clone(), || {
        let alpha = kernel.alpha();
        let j1 = kernel.j1();
        let mut worst: f64 = 0.0;
        for x in grid(0.05, 0.95, 19) {
            let via_drift = f.generator(kernel, x)?;
            let h = kernel.eigenfunction(0, x)?;
            let dj = x.powf(-alpha) * j1 * bessel_j_derivative(alpha, j1 * x)?;
            let l0_hf = 0.5 * h * (f.d2f)(x) + (h / (2.0 * x) + dj) * (f.df)(x);
            let via_doob = l0_hf / h;
            worst = worst.max((via_drift - via_doob).abs() / via_drift.abs().max(1.0));
        }
        Ok(VerificationReport::new("doob_form", p, worst, 1e-8))
    })
}

/// Fits `log sup_y |p^{(n)}_t(x0, y) − Q_t(x0, y)|` against `n` and compares the slope
/// with `−(j_2² − j_1²)/2`.
pub fn check_convergence_rate(kernel: &SpectralKernel, x0: f64, t: f64, ns: &[f64]) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("x0", x0.to_string()),
        ("t", t.to_string()),
        ("n", list(ns)),
    ]);
    run_check("convergence_rate", p.clone(), || {
        if ns.len() < 2 || ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Verification("need at least two increasing horizons".into()));
        }
        let ys = grid(0.0025, 0.9975, 200);
        let mut logs = Vec::with_capacity(ns.len());
        for &n in ns {
            let sup = ys
                .iter()
                .map(|&y| kernel.conditioned_minus_limit(x0, y, t, n).map(f64::abs))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            if !(sup > 0.0) {
                return Err(Error::Verification(format!("difference vanished at n = {n}")));
            }
            logs.push(sup.ln());
        }
        if logs.windows(2).any(|w| w[1] >= w[0]) {
            return Ok(VerificationReport::new("convergence_rate", p, f64::INFINITY, 0.1)
                .with_note(format!("sup difference not decreasing: logs {}", list(&logs))));
        }
        let m = ns.len() as f64;
        let mx = ns.iter().sum::<f64>() / m;
        let my = logs.iter().sum::<f64>() / m;
        let sxy: f64 = ns.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = ns.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        let (j1, j2) = (kernel.mode_j(0), kernel.mode_j(1));
        let target = -0.5 * (j2 * j2 - j1 * j1);
        let rel = ((slope - target) / target).abs();
        Ok(VerificationReport::new("convergence_rate", p, rel, 0.1)
            .with_note(format!("slope {slope}, target {target}")))
    })
}

/// `|∫ π(x) Q_t(x, y) dx − π(y)|` on 41 points of `[0, 1]`.
pub fn check_stationarity(kernel: &SpectralKernel, ts: &[f64]) -> VerificationReport {
    let p = params(&[("d", kernel.params().d().to_string()), ("t", list(ts)), ("y_points", "41".into())]);
    run_check("stationarity", p.clone(), || {
        let rule = kernel.rule();
        let pi_nodes: Vec<f64> = rule.nodes().iter().map(|&x| kernel.stationary_density(x)).collect();
        let mut worst: f64 = 0.0;
        for &t in ts {
            for y in grid(0.0, 1.0, 41) {
                let col = kernel.limit_column(y, t)?;
                let lhs: f64 = col
                    .iter()
                    .zip(&pi_nodes)
                    .zip(rule.weights())
                    .map(|((q, p), w)| q * p * w)
                    .sum();
                worst = worst.max((lhs - kernel.stationary_density(y)).abs());
            }
        }
        Ok(VerificationReport::new("stationarity", p, worst, 1e-8))
    })
}

fn fb_rule(k: usize) -> CompositeRule {
    CompositeRule::unit((4 * k).max(64))
}

/// `c_i = 2 ∫₀¹ f(y) J_α(j_i y) y dy / J_{α+1}(j_i)²` for `i = 1..=k`.
pub fn fourier_bessel_coefficients(alpha: f64, f: impl Fn(f64) -> f64, k: usize) -> Result<(ZeroTable, Vec<f64>)> {
    let table = ZeroTable::compute(alpha, k, 1e-12)?;
    let rule = fb_rule(k);
    let fv: Vec<f64> = rule.nodes().iter().map(|&y| f(y)).collect();
    if fv.iter().zip(rule.nodes()).any(|(v, y)| !(v * y.sqrt()).is_finite()) {
        return Err(Error::Verification("x^{1/2} f(x) is not finite on the quadrature nodes".into()));
    }
    let coeffs = table
        .zeros()
        .iter()
        .map(|&j| {
            let norm = bessel_j(alpha + 1.0, j)?;
            let integrand: Vec<f64> = rule
                .nodes()
                .iter()
                .zip(&fv)
                .map(|(&y, v)| Ok(v * bessel_j(alpha, j * y)? * y))
                .collect::<Result<_>>()?;
            Ok(2.0 * rule.sum_tabulated(&integrand) / (norm * norm))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((table, coeffs))
}

/// Largest reconstruction error of the `k`-term series on 91 points of `[0.05, 0.95]`.
pub fn fourier_bessel_error(alpha: f64, f: impl Fn(f64) -> f64 + Copy, k: usize) -> Result<f64> {
    let (table, c) = fourier_bessel_coefficients(alpha, f, k)?;
    let mut worst: f64 = 0.0;
    for x in grid(0.05, 0.95, 91) {
        let mut s = 0.0;
        for (ci, &j) in c.iter().zip(table.zeros()) {
            s += ci * bessel_j(alpha, j * x)?;
        }
        worst = worst.max((s - f(x)).abs());
    }
    Ok(worst)
}

/// Reconstruction error along `ks` must decrease; the residual is the error at the last `k`.
pub fn check_fourier_bessel(
    kernel: &SpectralKernel,
    name: &str,
    f: impl Fn(f64) -> f64 + Copy,
    ks: &[usize],
    tol: f64,
) -> VerificationReport {
    let alpha = kernel.alpha();
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("f", name.into()),
        ("k", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")),
    ]);
    run_check("fourier_bessel", p.clone(), || {
        let errs = ks
            .iter()
            .map(|&k| fourier_bessel_error(alpha, f, k))
            .collect::<Result<Vec<f64>>>()?;
        let note = format!("errors {}", list(&errs));
        if errs.windows(2).any(|w| w[1] > w[0]) {
            return Ok(VerificationReport::new("fourier_bessel", p, f64::INFINITY, tol)
                .with_note(format!("not decreasing: {note}")));
        }
        Ok(VerificationReport::new("fourier_bessel", p, *errs.last().unwrap_or(&f64::NAN), tol).with_note(note))
    })
}
