//! Numerical certificates for the kernels and samplers. Each check produces a
//! [`VerificationReport`] with a measured residual and the tolerance it is held to.

mod analytic;
mod closed_form;
mod montecarlo;

pub use analytic::{
    check_chapman_kolmogorov, check_convergence_rate, check_doob_form, check_eigenrelation,
    check_fourier_bessel, check_generator, check_normalization, check_stationarity, check_zeros,
    fourier_bessel_coefficients, fourier_bessel_error, generator_estimates, richardson_to_zero,
    GeneratorEstimate, J0_ZEROS,
};
pub use closed_form::{check_d3_closed_forms, taboo_kernel, dirichlet_sine_kernel};
pub use montecarlo::{
    check_acceptance_rate, check_cross_sampler, check_ergodic, check_montecarlo_marginals,
    check_two_time, CdfTable,
};

use crate::error::{Error, Result};
use crate::kernels::SpectralKernel;
use crate::samplers::SamplerKind;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Statistical checks with fewer samples than this are reported but never failed.
pub const MIN_POWERED_SAMPLES: usize = 10_000;

/// Significance level of every KS and χ² check.
pub const SIGNIFICANCE: f64 = 0.01;

/// One executed check. `passed` is `residual <= tol`; a NaN residual (from an
/// error) never passes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub params: String,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
    pub seconds: f64,
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, params: impl Into<String>, residual: f64, tol: f64) -> Self {
        VerificationReport {
            name: name.into(),
            params: params.into(),
            residual,
            tol,
            passed: residual <= tol,
            seconds: 0.0,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, params: impl Into<String>, err: &Error) -> Self {
        let mut r = Self::new(name, params, f64::NAN, f64::NAN);
        r.note = Some(err.to_string());
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Runs `body`, timing it and turning an error into a failed report.
pub(crate) fn run_check(
    name: &str,
    params: String,
    body: impl FnOnce() -> Result<VerificationReport>,
) -> VerificationReport {
    let start = Instant::now();
    let mut report = match body() {
        Ok(r) => r,
        Err(e) => VerificationReport::failed(name, params, &e),
    };
    report.seconds = start.elapsed().as_secs_f64();
    report
}

/// A function on `[0, 1]` with its first two derivatives, meant to have
/// `f'(0) = f'(1) = 0`.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
    pub d2f: fn(f64) -> f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

impl TestFunction {
    /// Largest gap between the stored derivatives and central differences at step `h`,
    /// relative to the derivative's size when that exceeds one.
    pub fn derivative_mismatch(&self, h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=100 {
            let x = (i as f64 / 100.0).clamp(h, 1.0 - h);
            let d1 = ((self.f)(x + h) - (self.f)(x - h)) / (2.0 * h);
            let d2 = ((self.f)(x + h) - 2.0 * (self.f)(x) + (self.f)(x - h)) / (h * h);
            let (e1, e2) = ((self.df)(x), (self.d2f)(x));
            worst = worst
                .max((d1 - e1).abs() / e1.abs().max(1.0))
                .max((d2 - e2).abs() / e2.abs().max(1.0));
        }
        worst
    }

    /// Whether `f'` vanishes at both ends, the boundary condition of the test class.
    pub fn satisfies_boundary_conditions(&self) -> bool {
        (self.df)(0.0).abs() < 1e-12 && (self.df)(1.0).abs() < 1e-12
    }

    /// `f''/2 + b f'` with the limit drift `b`.
    pub fn generator(&self, kernel: &SpectralKernel, x: f64) -> Result<f64> {
        Ok(0.5 * (self.d2f)(x) + kernel.limit_drift(x)? * (self.df)(x))
    }

    /// `1`, `cos(πx)`, `x²(1−x)²` and `cos(2πx)`.
    pub fn defaults() -> [TestFunction; 4] {
        [
            TestFunction {
                name: "one",
                f: |_| 1.0,
                df: |_| 0.0,
                d2f: |_| 0.0,
            },
            TestFunction {
                name: "cos_pi",
                f: |x| (PI * x).cos(),
                df: |x| -PI * (PI * x).sin(),
                d2f: |x| -PI * PI * (PI * x).cos(),
            },
            TestFunction {
                name: "bump",
                f: |x| x * x * (1.0 - x) * (1.0 - x),
                df: |x| 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
                d2f: |x| 2.0 - 12.0 * x + 12.0 * x * x,
            },
            TestFunction {
                name: "cos_2pi",
                f: |x| (2.0 * PI * x).cos(),
                df: |x| -2.0 * PI * (2.0 * PI * x).sin(),
                d2f: |x| -4.0 * PI * PI * (2.0 * PI * x).cos(),
            },
        ]
    }
}

/// Named groups of checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Suite {
    None,
    Full,
    D3Oracle,
    /// A single check family by name.
    Only(String),
}

/// Check families selectable on their own.
pub const CHECK_NAMES: [&str; 16] = [
    "zeros",
    "eigenrelation",
    "normalization",
    "chapman_kolmogorov",
    "generator",
    "doob_form",
    "convergence_rate",
    "stationarity",
    "fourier_bessel",
    "montecarlo_free",
    "montecarlo_limit",
    "montecarlo_exact",
    "two_time",
    "ergodic",
    "acceptance_rate",
    "cross_sampler",
];

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Suite::None),
            "full" => Ok(Suite::Full),
            "d3-oracle" => Ok(Suite::D3Oracle),
            other if CHECK_NAMES.contains(&other) => Ok(Suite::Only(other.to_string())),
            other => Err(Error::Config {
                field: "suite".into(),
                message: format!("unknown suite `{other}`"),
            }),
        }
    }
}

/// Parameters shared by the checks of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub d: f64,
    pub seed: u64,
    /// Sample count of the Monte Carlo checks.
    pub samples: usize,
    /// Start point of the Monte Carlo and convergence checks.
    pub x0: f64,
    /// Marginal time of the Monte Carlo checks.
    pub t: f64,
    /// Conditioning horizon of the exact-sampler marginal check.
    pub horizon: f64,
    /// Horizon of the rejection-based checks.
    pub rejection_horizon: f64,
    pub rejection_max_attempts: u64,
    /// Attempts used to estimate the acceptance rate.
    pub acceptance_attempts: u64,
    /// Time horizon of the ergodic histogram.
    pub ergodic_horizon: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            d: 2.0,
            seed: 20240601,
            samples: 100_000,
            x0: 0.5,
            t: 1.0,
            horizon: 4.0,
            rejection_horizon: 0.5,
            rejection_max_attempts: 20_000_000,
            acceptance_attempts: 200_000,
            ergodic_horizon: 10_000.0,
        }
    }
}

fn wanted(suite: &Suite, name: &str) -> bool {
    match suite {
        Suite::Full => true,
        Suite::Only(n) => n == name,
        _ => false,
    }
}

/// Runs the checks of `suite` in a fixed order.
pub fn run_suite(suite: &Suite, cfg: &VerifyConfig, kernel: &SpectralKernel) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    if matches!(suite, Suite::None) {
        return out;
    }
    if matches!(suite, Suite::D3Oracle) {
        return check_d3_closed_forms();
    }
    let d = cfg.d;
    if wanted(suite, "zeros") {
        out.extend(check_zeros());
    }
    if wanted(suite, "eigenrelation") {
        out.push(check_eigenrelation(kernel, 5, &[0.1, 0.5, 1.0, 2.0]));
    }
    if wanted(suite, "normalization") {
        out.push(check_normalization(kernel, &[0.1, 1.0, 5.0]));
    }
    if wanted(suite, "chapman_kolmogorov") {
        for (t, s) in [(0.2, 0.3), (0.5, 0.5), (1.0, 2.0)] {
            out.push(check_chapman_kolmogorov(kernel, t, s));
        }
    }
    if wanted(suite, "generator") {
        for f in TestFunction::defaults() {
            out.extend(check_generator(kernel, &f, &[0.004, 0.002, 0.001]));
        }
    }
    if wanted(suite, "doob_form") {
        for f in TestFunction::defaults() {
            out.push(check_doob_form(kernel, &f));
        }
    }
    if wanted(suite, "convergence_rate") {
        out.push(check_convergence_rate(kernel, 0.3, 0.5, &[1.0, 2.0, 3.0, 4.0, 5.0]));
    }
    if wanted(suite, "stationarity") {
        out.push(check_stationarity(kernel, &[0.5, 2.0]));
    }
    if wanted(suite, "fourier_bessel") {
        let alpha = kernel.alpha();
        let f = move |x: f64| x.powf(alpha) * (1.0 - x * x);
        out.push(check_fourier_bessel(kernel, "x_alpha_one_minus_x2", f, &[5, 10, 25, 50], 1e-2));
    }
    let n = cfg.samples;
    if wanted(suite, "montecarlo_free") {
        out.push(check_montecarlo_marginals(kernel, SamplerKind::Bessel, n, cfg.t, f64::INFINITY, cfg.x0, cfg.seed));
    }
    if wanted(suite, "montecarlo_limit") {
        out.push(check_montecarlo_marginals(kernel, SamplerKind::Limit, n, cfg.t, f64::INFINITY, cfg.x0, cfg.seed));
    }
    if wanted(suite, "montecarlo_exact") {
        out.push(check_montecarlo_marginals(kernel, SamplerKind::Exact, n, cfg.t, cfg.horizon, cfg.x0, cfg.seed));
        out.push(check_montecarlo_marginals(kernel, SamplerKind::Exact, n, cfg.t, f64::INFINITY, cfg.x0, cfg.seed));
    }
    if wanted(suite, "two_time") {
        out.push(check_two_time(kernel, n, 0.5, 1.0, cfg.horizon, cfg.x0, cfg.seed));
        out.push(check_two_time(kernel, n, 0.5, 1.0, f64::INFINITY, cfg.x0, cfg.seed));
    }
    if wanted(suite, "ergodic") {
        out.push(check_ergodic(kernel, cfg.ergodic_horizon, 20, cfg.seed));
    }
    if wanted(suite, "acceptance_rate") {
        out.push(check_acceptance_rate(kernel, cfg.x0, cfg.rejection_horizon, cfg.acceptance_attempts, cfg.seed));
    }
    if wanted(suite, "cross_sampler") {
        out.push(check_cross_sampler(
            kernel,
            n,
            0.5 * cfg.rejection_horizon,
            cfg.rejection_horizon,
            cfg.x0,
            cfg.seed,
            cfg.rejection_max_attempts,
        ));
    }
    if matches!(suite, Suite::Full) && d == 3.0 {
        out.extend(check_d3_closed_forms());
    }
    out
}

/// JSON array of flat report objects. Runtimes are zeroed unless `timings` is set,
/// which keeps repeated runs byte-identical.
pub fn reports_to_json(reports: &[VerificationReport], timings: bool) -> Result<String> {
    let cleaned: Vec<VerificationReport> = reports
        .iter()
        .cloned()
        .map(|mut r| {
            if !timings {
                r.seconds = 0.0;
            }
            r
        })
        .collect();
    Ok(serde_json::to_string_pretty(&cleaned)?)
}

/// `key=value` pairs joined by commas.
pub(crate) fn params(pairs: &[(&str, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}
