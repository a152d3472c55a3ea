//! Acceptance criteria 1–10. Each prints one PASS/FAIL line; the test fails if any does.
//! Tolerances, grids, seeds and runtime budgets are pinned here rather than read
//! from the library defaults.

use hardedge::samplers::SamplerKind;
use hardedge::specfun::ZeroTable;
use hardedge::verify::{
    check_acceptance_rate, check_chapman_kolmogorov, check_convergence_rate, check_cross_sampler,
    check_d3_closed_forms, check_eigenrelation, check_ergodic, check_generator, check_montecarlo_marginals,
    check_normalization, check_stationarity, TestFunction, VerificationReport, SIGNIFICANCE,
};
use hardedge::SpectralKernel;
use num_bigint::{BigInt, Sign};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

const DIMS: [f64; 2] = [2.0, 3.0];
const SEED: u64 = 20240601;
const ALPHA: f64 = 0.01;

const ZERO_HALF_TOL: f64 = 1e-12;
const ZERO_J0_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-7;
const NORM_TOL: f64 = 1e-8;
const CK_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-10;
const GENERATOR_TOL: f64 = 1e-4;
const GENERATOR_RATE_FACTOR: f64 = 1.5;
const RATE_REL_TOL: f64 = 0.1;
const STATIONARY_TOL: f64 = 1e-8;
const Z_TOL: f64 = 3.0;

const MC_SAMPLES: usize = 100_000;
const MC_X0: f64 = 0.5;
const MC_T: f64 = 1.0;
const MC_HORIZON: f64 = 4.0;
/// Proposal budget of the rejection sampler at the horizon above.
const REJECTION_BUDGET: u64 = 2_000_000;
const ERGODIC_HORIZON: f64 = 10_000.0;
const ERGODIC_BINS: usize = 20;

struct Line {
    passed: bool,
    detail: String,
    /// One entry per sub-check, printed indented under the verdict.
    checks: Vec<String>,
}

impl Line {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Line {
            passed,
            detail: detail.into(),
            checks: Vec::new(),
        }
    }
}

fn kernel(d: f64) -> SpectralKernel {
    SpectralKernel::with_dimension(d).expect("kernel")
}

/// Compares residuals against pinned tolerances; a NaN residual is a miss.
fn judge(checks: &[(String, f64, f64)]) -> Line {
    let mut misses = 0;
    let mut worst = ("", 0.0, 0.0, f64::NEG_INFINITY);
    for (label, residual, tol) in checks {
        let ratio = residual / tol;
        if !(residual <= tol) {
            misses += 1;
        }
        if ratio.is_nan() || ratio > worst.3 {
            worst = (label, *residual, *tol, if ratio.is_nan() { f64::INFINITY } else { ratio });
        }
    }
    let mut line = if misses == 0 {
        Line::new(true, format!("worst {} {:.3e} <= {:.0e}", worst.0, worst.1, worst.2))
    } else {
        Line::new(false, format!("{misses} of {} checks missed", checks.len()))
    };
    line.checks = checks
        .iter()
        .map(|(label, residual, tol)| {
            let mark = if residual <= tol { "ok  " } else { "miss" };
            format!("{mark} {label}: {residual:.3e} vs {tol:.3e}")
        })
        .collect();
    line
}

fn residual_of(label: String, r: &VerificationReport, tol: f64) -> (String, f64, f64) {
    (label, r.residual, tol)
}

fn note(r: &VerificationReport) -> String {
    r.note.clone().unwrap_or_default()
}

/// `J_0(x)` sign from its power series in 320-bit fixed point, for `1 ≤ x < 64`.
fn j0_sign(x: f64) -> Sign {
    const S: u32 = 320;
    assert!((1.0..64.0).contains(&x));
    let xs = BigInt::from((x * 2f64.powi(52)) as i64) << (S - 52);
    let q = (&xs * &xs) >> (S + 2);
    let mut term = BigInt::from(1) << S;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        term = -((&term * &q) >> S) / BigInt::from(k * k);
        sum += &term;
        if term.sign() == Sign::NoSign && k as f64 > x {
            break;
        }
        k += 1;
    }
    sum.sign()
}

/// First `count` zeros of `J_0` by scanning and bisecting the exact series.
fn j0_zeros_by_bisection(count: usize) -> Vec<f64> {
    let mut zeros = Vec::new();
    let mut a = 1.0;
    let mut sa = j0_sign(a);
    while zeros.len() < count {
        let b = a + 0.05;
        let sb = j0_sign(b);
        if sb != sa {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-15 * hi {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if j0_sign(mid) == sa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        sa = sb;
    }
    zeros
}

fn zeros() -> Line {
    let oracle = j0_zeros_by_bisection(10);
    let start = Instant::now();
    let half = ZeroTable::compute(0.5, 50, 1e-12).and_then(|t| t.certify().map(|_| t));
    let zero = ZeroTable::compute(0.0, 10, 1e-12).and_then(|t| t.certify().map(|_| t));
    let seconds = start.elapsed().as_secs_f64();
    let (half, zero) = match (half, zero) {
        (Ok(h), Ok(z)) => (h, z),
        (h, z) => return Line::new(false, format!("zero computation failed: {:?} {:?}", h.err(), z.err())),
    };
    let r_half = half
        .zeros()
        .iter()
        .enumerate()
        .map(|(k, z)| (z - (k + 1) as f64 * PI).abs())
        .fold(0.0, f64::max);
    let r_zero = zero.zeros().iter().zip(&oracle).map(|(z, o)| (z - o).abs()).fold(0.0, f64::max);
    let mut line = judge(&[
        ("j_{k,1/2}-kpi".into(), r_half, ZERO_HALF_TOL),
        ("j_{k,0}-bisection".into(), r_zero, ZERO_J0_TOL),
        ("seconds".into(), seconds, 1.0),
    ]);
    line.detail = format!("{} (library {seconds:.3}s)", line.detail);
    line
}

fn eigenrelation() -> Line {
    let checks: Vec<_> = DIMS
        .iter()
        .map(|&d| residual_of(format!("d={d}"), &check_eigenrelation(&kernel(d), 5, &[0.1, 0.5, 1.0, 2.0]), EIGEN_TOL))
        .collect();
    judge(&checks)
}

fn normalization() -> Line {
    let checks: Vec<_> = DIMS
        .iter()
        .map(|&d| residual_of(format!("d={d}"), &check_normalization(&kernel(d), &[0.1, 1.0, 5.0]), NORM_TOL))
        .collect();
    judge(&checks)
}

fn chapman_kolmogorov() -> Line {
    let mut checks = Vec::new();
    for d in DIMS {
        let k = kernel(d);
        for (t, s) in [(0.2, 0.3), (0.5, 0.5), (1.0, 2.0)] {
            checks.push(residual_of(format!("d={d},t={t},s={s}"), &check_chapman_kolmogorov(&k, t, s), CK_TOL));
        }
    }
    judge(&checks)
}

fn closed_forms() -> Line {
    let wanted = ["d3_killed", "d3_limit", "d3_survival", "d3_drift", "d3_stationary"];
    let reports = check_d3_closed_forms();
    let mut checks = Vec::new();
    for name in wanted {
        match reports.iter().find(|r| r.name == name) {
            Some(r) => checks.push(residual_of(name.into(), r, CLOSED_FORM_TOL)),
            None => checks.push((format!("{name} missing"), f64::NAN, CLOSED_FORM_TOL)),
        }
    }
    judge(&checks)
}

fn generator() -> Line {
    let ts = [0.004, 0.002, 0.001];
    let mut checks = Vec::new();
    for d in DIMS {
        let k = kernel(d);
        for f in TestFunction::defaults() {
            let reports = check_generator(&k, &f, &ts);
            for r in &reports {
                let tol = if r.name == "generator_rate" {
                    GENERATOR_RATE_FACTOR.ln()
                } else {
                    GENERATOR_TOL
                };
                checks.push(residual_of(format!("d={d},f={},{}", f.name, r.name), r, tol));
            }
        }
    }
    judge(&checks)
}

fn convergence_rate() -> Line {
    let checks: Vec<_> = DIMS
        .iter()
        .map(|&d| {
            let r = check_convergence_rate(&kernel(d), 0.3, 0.5, &[1.0, 2.0, 3.0, 4.0, 5.0]);
            residual_of(format!("d={d} ({})", note(&r)), &r, RATE_REL_TOL)
        })
        .collect();
    judge(&checks)
}

/// A statistical report passes when its statistic is within its own critical value.
fn statistical(label: String, r: &VerificationReport) -> (String, f64, f64) {
    let powered = r.tol.is_finite();
    let tol = if powered { r.tol } else { f64::NAN };
    (format!("{label} [{}] {}", r.name, note(r)), r.residual, tol)
}

fn montecarlo() -> Line {
    let mut checks = Vec::new();
    for d in DIMS {
        let k = kernel(d);
        for sampler in [SamplerKind::Bessel, SamplerKind::Limit] {
            let r = check_montecarlo_marginals(&k, sampler, MC_SAMPLES, MC_T, f64::INFINITY, MC_X0, SEED);
            checks.push(statistical(format!("d={d}"), &r));
        }
    }
    let k = kernel(2.0);
    let cross = check_cross_sampler(&k, MC_SAMPLES, MC_T, MC_HORIZON, MC_X0, SEED, REJECTION_BUDGET);
    checks.push(statistical(format!("d=2,n={MC_HORIZON}"), &cross));
    let rate = check_acceptance_rate(&k, MC_X0, MC_HORIZON, REJECTION_BUDGET, SEED);
    checks.push((format!("d=2,n={MC_HORIZON} [acceptance_rate] {}", note(&rate)), rate.residual, Z_TOL));
    judge(&checks)
}

fn stationarity() -> Line {
    let mut checks = Vec::new();
    for d in DIMS {
        let k = kernel(d);
        checks.push(residual_of(format!("d={d} invariance"), &check_stationarity(&k, &[0.5, 2.0]), STATIONARY_TOL));
        checks.push(statistical(format!("d={d}"), &check_ergodic(&k, ERGODIC_HORIZON, ERGODIC_BINS, SEED)));
    }
    judge(&checks)
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> Option<(Vec<u8>, Option<Vec<u8>>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_hardedge"))
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", threads)
        .args(args)
        .args(["--out", "result"])
        .status()
        .ok()?;
    if status.code() != Some(0) {
        return None;
    }
    let out = std::fs::read(dir.join("result")).ok()?;
    let sidecar = std::fs::read(dir.join("result.json")).ok();
    Some((out, sidecar))
}

fn reproducibility() -> Line {
    let commands: [&[&str]; 8] = [
        &["zeros", "--d", "2.5", "--count", "20"],
        &["density", "--kind", "conditioned", "--d", "4", "--t", "0.5", "--n", "3"],
        &["sample", "--sampler", "exact", "--samples", "2000", "--steps", "4", "--n", "4"],
        &["sample", "--sampler", "limit", "--mode", "path", "--steps", "50", "--seed", "7"],
        &["sample", "--sampler", "rejection", "--samples", "300", "--n", "0.3", "--t", "0.3"],
        &["sample", "--sampler", "bessel", "--samples", "1000", "--d", "3"],
        &["verify", "--suite", "d3-oracle"],
        &["verify", "--suite", "eigenrelation", "--d", "5"],
    ];
    let first = tempfile::tempdir().expect("tempdir");
    let second = tempfile::tempdir().expect("tempdir");
    let mut misses = Vec::new();
    for args in commands {
        let a = run_cli(first.path(), "1", args);
        let b = run_cli(second.path(), "4", args);
        match (a, b) {
            (Some(a), Some(b)) if a == b => {}
            (Some(_), Some(_)) => misses.push(format!("`{}` differs", args.join(" "))),
            _ => misses.push(format!("`{}` did not run", args.join(" "))),
        }
    }
    if misses.is_empty() {
        Line::new(true, format!("{} commands byte-identical across reruns and thread counts", commands.len()))
    } else {
        Line::new(false, misses.join("; "))
    }
}

#[test]
fn acceptance_criteria() {
    assert_eq!(SIGNIFICANCE, ALPHA, "library significance level drifted");
    type Criterion = (u8, &'static str, f64, fn() -> Line);
    let criteria: [Criterion; 10] = [
        (1, "zero certification", 60.0, zeros),
        (2, "eigenrelation", 10.0, eigenrelation),
        (3, "normalization", 5.0, normalization),
        (4, "chapman-kolmogorov", 30.0, chapman_kolmogorov),
        (5, "d=3 closed forms", 5.0, closed_forms),
        (6, "generator", 60.0, generator),
        (7, "convergence rate", 10.0, convergence_rate),
        (8, "monte carlo", 300.0, montecarlo),
        (9, "stationarity", 120.0, stationarity),
        (10, "reproducibility", 120.0, reproducibility),
    ];
    let mut failed = Vec::new();
    println!();
    for (id, name, budget, body) in criteria {
        let start = Instant::now();
        let mut line = body();
        let seconds = start.elapsed().as_secs_f64();
        if seconds > budget {
            line.passed = false;
            line.detail = format!("{}; runtime {seconds:.1}s over {budget}s", line.detail);
        }
        let verdict = if line.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name} ({seconds:.1}s): {}", line.detail);
        for c in &line.checks {
            println!("    {c}");
        }
        if !line.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
