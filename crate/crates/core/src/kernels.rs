//! Spectral transition densities of the Bessel process killed at level one,
//! of its conditioning on survival, and of the limiting diffusion on `[0, 1]`.
//!
//! With `h_i(x) = x^{-α} J_α(j_i x)` and `N_i = J_{α+1}(j_i)²`:
//!
//! ```text
//! killed      R_t(x,y) = 2 y^{α+1} Σ_i h_i(x) J_α(j_i y) / N_i · exp(−j_i² t/2)
//! survival    P^x(τ>t) = 2 Σ_i h_i(x) / (j_i J_{α+1}(j_i)) · exp(−j_i² t/2)
//! limit       Q_t(x,y) = 2 y J_α(j_1 y) Σ_i J_α(j_i y)/N_i · h_i(x)/h_1(x) · exp((j_1² − j_i²) t/2)
//! stationary  π(y)     = 2 y J_α(j_1 y)² / N_1
//! ```
//!
//! Every series is truncated adaptively: an envelope `amp_i · exp(−(j_i² − shift) t/2)`
//! bounds term `i`, and the smallest index whose geometric tail estimate drops
//! below `tail_tol` is used. Below `t_min` the series are refused.

use crate::error::{domain, Error, Result};
use crate::quad::CompositeRule;
use crate::specfun::{eigen_value, j_ratio, j_unchecked, ln_bessel_i_scaled, BesselParams, ZeroTable};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Smallest time at which spectral series are evaluated by default.
pub const T_MIN: f64 = 1.0e-3;

/// Distance from `x = 1` below which `h_i/h_1` is evaluated from its Taylor expansion at 1.
const RATIO_TAYLOR_BAND: f64 = 1.0e-3;

/// Zeros are computed in chunks of this size while sizing the table.
const ZERO_CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelConfig {
    /// Absolute bound on the discarded tail of every spectral series.
    pub tail_tol: f64,
    /// Cap on the number of spectral terms (and stored zeros).
    pub max_terms: usize,
    /// Number of Gauss–Legendre panels on `[0, 1]`.
    pub quad_points: usize,
    pub t_min: f64,
    /// Absolute accuracy of the stored zeros.
    pub zero_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            tail_tol: 1e-13,
            max_terms: 400,
            quad_points: 64,
            t_min: T_MIN,
            zero_tol: 1e-12,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: &str| {
            Err(Error::Config {
                field: field.into(),
                message: message.into(),
            })
        };
        if !(self.tail_tol > 0.0) {
            return bad("tail_tol", "must be positive");
        }
        if self.max_terms < 1 {
            return bad("max_terms", "must be at least 1");
        }
        if self.quad_points < 16 {
            return bad("quad_points", "must be at least 16");
        }
        if !(self.t_min > 0.0) {
            return bad("t_min", "must be positive");
        }
        if !(self.zero_tol > 0.0) {
            return bad("zero_tol", "must be positive");
        }
        Ok(())
    }
}

/// Which density a batch evaluation or a CSV dump refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Killed,
    Limit,
    Free,
    Conditioned,
    Stationary,
}

impl DensityKind {
    pub const ALL: [DensityKind; 5] = [
        DensityKind::Killed,
        DensityKind::Limit,
        DensityKind::Free,
        DensityKind::Conditioned,
        DensityKind::Stationary,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DensityKind::Killed => "killed",
            DensityKind::Limit => "limit",
            DensityKind::Free => "free",
            DensityKind::Conditioned => "conditioned",
            DensityKind::Stationary => "stationary",
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DensityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DensityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config {
                field: "kind".into(),
                message: format!("unknown density kind `{s}`"),
            })
    }
}

#[derive(Clone, Debug)]
struct Mode {
    j: f64,
    /// `2 / J_{α+1}(j)²`
    inv_norm: f64,
    /// `h(0) = (j/2)^α / Γ(α+1)`
    h0: f64,
    /// `2 / (j J_{α+1}(j))`, the survival coefficient
    surv: f64,
    /// Taylor coefficients of `h` at `x = 1` in powers of `x − 1`, starting at the linear one.
    taylor1: Vec<f64>,
    /// Envelope amplitude bounding every series term of this mode.
    amp: f64,
}

/// Spectral kernels for one dimension `d`, with zeros, normalizations and the
/// quadrature basis precomputed. Immutable after construction.
#[derive(Clone, Debug)]
pub struct SpectralKernel {
    params: BesselParams,
    table: ZeroTable,
    config: KernelConfig,
    modes: Vec<Mode>,
    rule: CompositeRule,
    /// `basis[i][q] = J_α(j_i y_q)` on the quadrature nodes.
    basis: Vec<Vec<f64>>,
    /// `y_q^{α+1}` on the quadrature nodes.
    node_weight: Vec<f64>,
}

impl SpectralKernel {
    pub fn new(params: BesselParams, config: KernelConfig) -> Result<Self> {
        config.validate()?;
        let alpha = params.alpha();
        let mut table = ZeroTable::compute(alpha, ZERO_CHUNK.min(config.max_terms).max(3), config.zero_tol)?;
        let mut kernel = SpectralKernel {
            params,
            table: table.clone(),
            config,
            modes: Vec::new(),
            rule: CompositeRule::unit(config.quad_points),
            basis: Vec::new(),
            node_weight: Vec::new(),
        };
        loop {
            kernel.modes = build_modes(alpha, table.zeros());
            match kernel.truncation(config.t_min, 0.0) {
                Ok(_) => break,
                Err(Error::TruncationCap { .. }) if table.len() < config.max_terms + 2 => {
                    let next = (table.len() + ZERO_CHUNK).min(config.max_terms + 2);
                    table.extend_to(next)?;
                }
                Err(e) => return Err(e),
            }
        }
        kernel.table = table;
        let nodes = kernel.rule.nodes().to_vec();
        kernel.node_weight = nodes.iter().map(|&y| y.powf(alpha + 1.0)).collect();
        kernel.basis = kernel
            .modes
            .par_iter()
            .map(|m| nodes.iter().map(|&y| j_unchecked(alpha, m.j * y)).collect())
            .collect();
        Ok(kernel)
    }

    pub fn with_dimension(d: f64) -> Result<Self> {
        Self::new(BesselParams::new(d)?, KernelConfig::default())
    }

    pub fn params(&self) -> &BesselParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn table(&self) -> &ZeroTable {
        &self.table
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn t_min(&self) -> f64 {
        self.config.t_min
    }

    /// The first zero `j_{1,α}`.
    pub fn j1(&self) -> f64 {
        self.modes[0].j
    }

    /// The composite Gauss–Legendre rule on `[0, 1]` used by the batch entry points.
    pub fn rule(&self) -> &CompositeRule {
        &self.rule
    }

    pub(crate) fn mode_j(&self, i: usize) -> f64 {
        self.modes[i].j
    }

    pub(crate) fn mode_inv_norm(&self, i: usize) -> f64 {
        self.modes[i].inv_norm
    }

    pub(crate) fn mode_surv(&self, i: usize) -> f64 {
        self.modes[i].surv
    }

    /// Number of modes available to the series.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Number of series terms used at time `t` for the killed/survival series (`shift = 0`)
    /// or the Doob-transformed series (`shift = j_1²`).
    pub fn terms(&self, t: f64, doob: bool) -> Result<usize> {
        self.check_time(t)?;
        let shift = if doob { self.j1() * self.j1() } else { 0.0 };
        self.truncation(t, shift)
    }

    fn truncation(&self, t: f64, shift: f64) -> Result<usize> {
        let envelope = |m: &Mode| m.amp * (-(m.j * m.j - shift) * 0.5 * t).exp();
        let n = self.modes.len();
        let mut last_tail = f64::INFINITY;
        for k in 0..n.saturating_sub(2) {
            let next = envelope(&self.modes[k + 1]);
            let after = envelope(&self.modes[k + 2]);
            let rho = after / next;
            let tail = if next == 0.0 {
                0.0
            } else if rho < 1.0 {
                next / (1.0 - rho)
            } else {
                f64::INFINITY
            };
            last_tail = tail;
            if tail <= self.config.tail_tol {
                let used = k + 1;
                if used > self.config.max_terms {
                    break;
                }
                return Ok(used);
            }
        }
        Err(Error::TruncationCap {
            terms: n.min(self.config.max_terms),
            tail: last_tail,
            tol: self.config.tail_tol,
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain("t", t, "time must be positive and finite"));
        }
        if t < self.config.t_min {
            return Err(Error::SeriesRegime {
                t,
                t_min: self.config.t_min,
            });
        }
        Ok(())
    }

    fn h(&self, i: usize, x: f64) -> f64 {
        if x >= 1.0 {
            0.0
        } else {
            eigen_value(self.alpha(), self.modes[i].j, x)
        }
    }

    /// `h_i(x)` for 0-based mode `i` (so `i = 0` is `h_1`).
    pub fn eigenfunction(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.modes.len() {
            return Err(Error::IndexOutOfRange {
                index: i + 1,
                len: self.modes.len(),
            });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(domain("x", x, "eigenfunctions live on [0, 1]"));
        }
        Ok(self.h(i, x))
    }

    /// Continuous extension of `h_i(x)/h_1(x)` to `[0, 1]` (0-based `i`).
    ///
    /// At `x = 0` this is `(j_i/j_1)^α`; at `x = 1` it is
    /// `j_i J_{α+1}(j_i) / (j_1 J_{α+1}(j_1))`. Within `RATIO_TAYLOR_BAND` of 1 the
    /// ratio of Taylor expansions at 1 is used to avoid cancellation.
    pub fn h_ratio(&self, i: usize, x: f64) -> f64 {
        let alpha = self.alpha();
        if x <= 0.0 {
            return (self.modes[i].j / self.modes[0].j).powf(alpha);
        }
        let u = x - 1.0;
        if -u < RATIO_TAYLOR_BAND {
            let num = horner(&self.modes[i].taylor1, u);
            let den = horner(&self.modes[0].taylor1, u);
            return num / den;
        }
        self.h(i, x) / self.h(0, x)
    }

    fn check_unit_open(what: &'static str, v: f64) -> Result<()> {
        if !(v > 0.0 && v < 1.0) {
            return Err(domain(what, v, "must lie strictly inside (0, 1)"));
        }
        Ok(())
    }

    fn check_unit_closed(what: &'static str, v: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&v) {
            return Err(domain(what, v, "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Density of `P^x(Y_t ∈ dy, τ > t)`.
    pub fn killed_density(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        Self::check_unit_open("x", x)?;
        Self::check_unit_open("y", y)?;
        let k = self.terms(t, false)?;
        let alpha = self.alpha();
        let sum: f64 = self.modes[..k]
            .iter()
            .enumerate()
            .map(|(i, m)| {
                self.h(i, x) * j_unchecked(alpha, m.j * y) * m.inv_norm * (-0.5 * m.j * m.j * t).exp()
            })
            .sum();
        Ok(y.powf(alpha + 1.0) * sum)
    }

    /// `P^x(τ > t)`; equals 1 at `t = 0`.
    pub fn survival(&self, x: f64, t: f64) -> Result<f64> {
        Self::check_unit_closed("x", x)?;
        if t == 0.0 {
            return Ok(if x < 1.0 { 1.0 } else { 0.0 });
        }
        let k = self.terms(t, false)?;
        Ok(self.modes[..k]
            .iter()
            .enumerate()
            .map(|(i, m)| m.surv * self.h(i, x) * (-0.5 * m.j * m.j * t).exp())
            .sum())
    }

    /// `(a_1(x), Σ_{i≥2} a_i(x) e^{−(j_i² − j_1²) s/2})` with `a_i = 2 h_i / (j_i J_{α+1}(j_i))`,
    /// so that `P^x(τ > s) = e^{−j_1² s/2} (a_1 + rest)`.
    fn survival_split(&self, x: f64, s: f64) -> Result<(f64, f64)> {
        // the leading correction terms are kept even when below tail_tol in absolute size
        let k = self.terms(s, true)?.max(3).min(self.modes.len());
        let j1sq = self.j1() * self.j1();
        let lead = self.modes[0].surv * self.h(0, x);
        let rest = self.modes[1..k.max(1)]
            .iter()
            .enumerate()
            .map(|(i, m)| m.surv * self.h(i + 1, x) * (-0.5 * (m.j * m.j - j1sq) * s).exp())
            .sum();
        Ok((lead, rest))
    }

    /// `ln P^x(τ > t)`, finite for horizons where the survival itself underflows.
    pub fn log_survival(&self, x: f64, t: f64) -> Result<f64> {
        Self::check_unit_closed("x", x)?;
        if t == 0.0 {
            return Ok(if x < 1.0 { 0.0 } else { f64::NEG_INFINITY });
        }
        let (lead, rest) = self.survival_split(x, t)?;
        let total = lead + rest;
        Ok(if total > 0.0 {
            -0.5 * self.j1() * self.j1() * t + total.ln()
        } else {
            f64::NEG_INFINITY
        })
    }

    /// The limit kernel `Q_t(x, y)`, with `x` allowed on the closed interval.
    pub fn limit_density(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        Self::check_unit_closed("x", x)?;
        Self::check_unit_closed("y", y)?;
        let k = self.terms(t, true)?;
        if y == 1.0 {
            return Ok(0.0);
        }
        let alpha = self.alpha();
        let j1sq = self.j1() * self.j1();
        let sum: f64 = self.modes[..k]
            .iter()
            .enumerate()
            .map(|(i, m)| {
                j_unchecked(alpha, m.j * y)
                    * m.inv_norm
                    * self.h_ratio(i, x)
                    * (0.5 * (j1sq - m.j * m.j) * t).exp()
            })
            .sum();
        Ok(y * j_unchecked(alpha, self.j1() * y) * sum)
    }

    /// Exact density of `X_t^{(n)}`, i.e. of `Y_t` given `τ > n`. An infinite
    /// horizon returns the limit kernel.
    pub fn conditioned_density_finite_n(&self, x: f64, y: f64, t: f64, n: f64) -> Result<f64> {
        if n == f64::INFINITY {
            return self.limit_density(x, y, t);
        }
        if !(n > t) {
            return Err(domain("n", n, "horizon must exceed t"));
        }
        let killed = self.killed_density(x, y, t)?;
        let num = self.log_survival(y, n - t)?;
        let den = self.log_survival(x, n)?;
        if den == f64::NEG_INFINITY {
            return Err(domain("x", x, "survival probability vanishes"));
        }
        Ok(killed * (num - den).exp())
    }

    /// `conditioned_density_finite_n − limit_density`, formed without cancellation:
    /// `R_t e^{j_1² t/2} (E_y a_1(x) − a_1(y) E_x) / (a_1(x)(a_1(x) + E_x))`.
    pub fn conditioned_minus_limit(&self, x: f64, y: f64, t: f64, n: f64) -> Result<f64> {
        if n == f64::INFINITY {
            return Ok(0.0);
        }
        if !(n > t) {
            return Err(domain("n", n, "horizon must exceed t"));
        }
        let killed = self.killed_density(x, y, t)?;
        let (ax, ex) = self.survival_split(x, n)?;
        let (ay, ey) = self.survival_split(y, n - t)?;
        let j1sq = self.j1() * self.j1();
        Ok(killed * (0.5 * j1sq * t).exp() * (ey * ax - ay * ex) / (ax * (ax + ex)))
    }

    /// Unconstrained Bessel transition density
    /// `y^{α+1} / (t x^α) · exp(−(x² + y²)/(2t)) · I_α(xy/t)`.
    pub fn free_density(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        free_density(&self.params, x, y, t)
    }

    /// Drift of the limit diffusion, `(log(x^{1/2} J_α(j_1 x)))'`.
    pub fn limit_drift(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(domain("x", x, "drift diverges at the boundary"));
        }
        Ok(self.drift_unchecked(x))
    }

    pub(crate) fn drift_unchecked(&self, x: f64) -> f64 {
        let alpha = self.alpha();
        let j1 = self.j1();
        (2.0 * alpha + 1.0) / (2.0 * x) - j1 * j_ratio(alpha, j1 * x)
    }

    /// `π(y) = 2 y J_α(j_1 y)² / J_{α+1}(j_1)²`, zero outside `[0, 1]`.
    pub fn stationary_density(&self, y: f64) -> f64 {
        if !(0.0..=1.0).contains(&y) {
            return 0.0;
        }
        let v = j_unchecked(self.alpha(), self.j1() * y);
        y * v * v * self.modes[0].inv_norm
    }

    /// Coefficients `c_i` such that `R_t(x, y) = y^{α+1} Σ_i c_i J_α(j_i y)`.
    pub(crate) fn killed_coefficients(&self, x: f64, t: f64) -> Result<Vec<f64>> {
        let k = self.terms(t, false)?;
        Ok(self.modes[..k]
            .iter()
            .enumerate()
            .map(|(i, m)| self.h(i, x) * m.inv_norm * (-0.5 * m.j * m.j * t).exp())
            .collect())
    }

    /// Coefficients `c_i` such that `Q_t(x, y) = y J_α(j_1 y) Σ_i c_i J_α(j_i y)`.
    pub(crate) fn limit_coefficients(&self, x: f64, t: f64) -> Result<Vec<f64>> {
        let k = self.terms(t, true)?;
        let j1sq = self.j1() * self.j1();
        Ok(self.modes[..k]
            .iter()
            .enumerate()
            .map(|(i, m)| self.h_ratio(i, x) * m.inv_norm * (0.5 * (j1sq - m.j * m.j) * t).exp())
            .collect())
    }

    /// `R_t(x, y_q)` on the quadrature nodes.
    pub fn killed_row(&self, x: f64, t: f64) -> Result<Vec<f64>> {
        Self::check_unit_closed("x", x)?;
        let c = self.killed_coefficients(x, t)?;
        Ok(self.combine(&c, |q| self.node_weight[q]))
    }

    /// `Q_t(x, y_q)` on the quadrature nodes.
    pub fn limit_row(&self, x: f64, t: f64) -> Result<Vec<f64>> {
        Self::check_unit_closed("x", x)?;
        let c = self.limit_coefficients(x, t)?;
        let nodes = self.rule.nodes();
        Ok(self.combine(&c, |q| nodes[q] * self.basis[0][q]))
    }

    /// `Q_t(x_q, y)` for every quadrature node `x_q`.
    pub fn limit_column(&self, y: f64, t: f64) -> Result<Vec<f64>> {
        Self::check_unit_closed("y", y)?;
        let k = self.terms(t, true)?;
        if y == 1.0 {
            return Ok(vec![0.0; self.rule.nodes().len()]);
        }
        let alpha = self.alpha();
        let j1sq = self.j1() * self.j1();
        // weights per mode depend on y and t only
        let w: Vec<f64> = self.modes[..k]
            .iter()
            .map(|m| j_unchecked(alpha, m.j * y) * m.inv_norm * (0.5 * (j1sq - m.j * m.j) * t).exp())
            .collect();
        let lead = y * j_unchecked(alpha, self.j1() * y);
        Ok(self
            .rule
            .nodes()
            .iter()
            .map(|&x| lead * w.iter().enumerate().map(|(i, wi)| wi * self.h_ratio(i, x)).sum::<f64>())
            .collect())
    }

    fn combine(&self, coeffs: &[f64], prefactor: impl Fn(usize) -> f64) -> Vec<f64> {
        let nq = self.rule.len();
        let mut row = vec![0.0; nq];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (r, v) in row.iter_mut().zip(b) {
                *r += c * v;
            }
        }
        for (q, r) in row.iter_mut().enumerate() {
            *r *= prefactor(q);
        }
        row
    }

    /// `∫₀¹ Q_t(x, y) f(y) dy` by the composite rule.
    pub fn limit_expectation(&self, x: f64, t: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let row = self.limit_row(x, t)?;
        Ok(self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&row)
            .map(|((&y, &w), &q)| w * q * f(y))
            .sum())
    }

    /// `∫₀¹ R_t(x, y) f(y) dy` by the composite rule.
    pub fn killed_expectation(&self, x: f64, t: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let row = self.killed_row(x, t)?;
        Ok(self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&row)
            .map(|((&y, &w), &r)| w * r * f(y))
            .sum())
    }

    /// Evaluates one density kind on a list of `(x, y)` points in parallel.
    /// The result does not depend on the number of worker threads.
    pub fn evaluate_points(
        &self,
        kind: DensityKind,
        points: &[(f64, f64)],
        t: f64,
        n: f64,
    ) -> Result<Vec<f64>> {
        points
            .par_iter()
            .map(|&(x, y)| self.evaluate(kind, x, y, t, n))
            .collect()
    }

    /// Single-point dispatch over [`DensityKind`]. `n` is used by `Conditioned` only.
    pub fn evaluate(&self, kind: DensityKind, x: f64, y: f64, t: f64, n: f64) -> Result<f64> {
        match kind {
            DensityKind::Killed => self.killed_density(x, y, t),
            DensityKind::Limit => self.limit_density(x, y, t),
            DensityKind::Free => self.free_density(x, y, t),
            DensityKind::Conditioned => self.conditioned_density_finite_n(x, y, t, n),
            DensityKind::Stationary => Ok(self.stationary_density(y)),
        }
    }

    /// Integral over `y` of the chosen density from `x` at time `t`.
    pub fn total_mass(&self, kind: DensityKind, x: f64, t: f64, n: f64) -> Result<f64> {
        match kind {
            DensityKind::Killed => self.killed_expectation(x, t, |_| 1.0),
            DensityKind::Limit => self.limit_expectation(x, t, |_| 1.0),
            DensityKind::Stationary => Ok(self.rule.integrate(|y| self.stationary_density(y))),
            DensityKind::Conditioned => {
                let vals: Result<Vec<f64>> = self
                    .rule
                    .nodes()
                    .iter()
                    .map(|&y| self.conditioned_density_finite_n(x, y, t, n))
                    .collect();
                Ok(self.rule.sum_tabulated(&vals?))
            }
            DensityKind::Free => {
                let upper = x + 10.0 * t.sqrt();
                let rule = CompositeRule::new(0.0, upper, self.config.quad_points * 4, 8);
                let vals: Result<Vec<f64>> = rule
                    .nodes()
                    .iter()
                    .map(|&y| self.free_density(x, y, t))
                    .collect();
                Ok(rule.sum_tabulated(&vals?))
            }
        }
    }

    /// Probability mass `∫_{edges[b]}^{edges[b+1]} Q_t(x, y) dy` for each bin.
    pub fn limit_bin_masses(&self, x: f64, t: f64, edges: &[f64]) -> Result<Vec<f64>> {
        let c = self.limit_coefficients(x, t)?;
        let alpha = self.alpha();
        let j1 = self.j1();
        let (gx, gw) = crate::quad::gauss_legendre(16);
        let mut out = Vec::with_capacity(edges.len().saturating_sub(1));
        for win in edges.windows(2) {
            let (a, b) = (win[0], win[1]);
            let mut mass = 0.0;
            // four panels per bin keep the 16-point rule exact to rounding for these modes
            let panels = 4;
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let left = a + p as f64 * h;
                for (z, w) in gx.iter().zip(&gw) {
                    let y = left + 0.5 * h * (z + 1.0);
                    let s: f64 = c
                        .iter()
                        .zip(&self.modes)
                        .map(|(ci, m)| ci * j_unchecked(alpha, m.j * y))
                        .sum();
                    mass += 0.5 * h * w * y * j_unchecked(alpha, j1 * y) * s;
                }
            }
            out.push(mass);
        }
        Ok(out)
    }
}

/// Unconstrained Bessel transition density for the given dimension.
pub fn free_density(params: &BesselParams, x: f64, y: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("x", x, "start point must be positive"));
    }
    if !(y > 0.0) {
        return Err(domain("y", y, "end point must be positive"));
    }
    if !(t > 0.0) {
        return Err(domain("t", t, "time must be positive"));
    }
    let alpha = params.alpha();
    let z = x * y / t;
    let ln_i = ln_bessel_i_scaled(alpha, z)?;
    let ln_f = (alpha + 1.0) * y.ln() - t.ln() - alpha * x.ln() - (x - y) * (x - y) / (2.0 * t) + ln_i;
    Ok(ln_f.exp())
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn build_modes(alpha: f64, zeros: &[f64]) -> Vec<Mode> {
    let g = crate::specfun::gamma(alpha + 1.0);
    let mut modes: Vec<Mode> = zeros
        .iter()
        .map(|&j| {
            let jp1 = j_unchecked(alpha + 1.0, j);
            Mode {
                j,
                inv_norm: 2.0 / (jp1 * jp1),
                h0: (0.5 * j).powf(alpha) / g,
                surv: 2.0 / (j * jp1),
                taylor1: taylor_at_one(alpha, j, -j * jp1),
                amp: 0.0,
            }
        })
        .collect();
    let (j1, slope1) = (modes[0].j, modes[0].taylor1[0]);
    for m in &mut modes {
        let ratio = ((m.j / j1).powf(alpha)).max((m.taylor1[0] / slope1).abs()).max(1.0);
        m.amp = 4.0 * m.h0.max(1.0) * ratio * m.inv_norm.max(1.0);
    }
    modes
}

/// Coefficients `c_1, c_2, …` of `h(1 + u) = Σ_{n≥1} c_n u^n` for
/// `h(x) = x^{-α} J_α(j x)`, from `x h'' + (2α+1) h' + j² x h = 0` and `h(1) = 0`.
fn taylor_at_one(alpha: f64, j: f64, slope: f64) -> Vec<f64> {
    const N: usize = 24;
    let mut c = vec![0.0; N + 1];
    c[1] = slope;
    let j2 = j * j;
    for m in 0..(N - 1) {
        let cm1 = if m >= 1 { c[m - 1] } else { 0.0 };
        let mf = m as f64;
        c[m + 2] = -((mf + 1.0) * (mf + 2.0 * alpha + 1.0) * c[m + 1] + j2 * (c[m] + cm1))
            / ((mf + 2.0) * (mf + 1.0));
    }
    c.remove(0);
    c
}
