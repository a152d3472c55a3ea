//! Inverse-CDF sampling from densities tabulated on `[0, 1]`, with a monotone
//! cubic Hermite interpolant of the cumulative integral.

use crate::error::{Error, Result};

/// Number of uniform grid points used for inverse-CDF tables.
pub const DEFAULT_TABLE_POINTS: usize = 2048;

/// Fritsch–Carlson limiting of endpoint slopes for a cell with secant `delta`.
fn limit_slopes(m0: f64, m1: f64, delta: f64) -> (f64, f64) {
    if delta <= 0.0 {
        return (0.0, 0.0);
    }
    let (mut a, mut b) = (m0.max(0.0) / delta, m1.max(0.0) / delta);
    let r = a * a + b * b;
    if r > 9.0 {
        let tau = 3.0 / r.sqrt();
        a *= tau;
        b *= tau;
    }
    (a * delta, b * delta)
}

/// Solves `H(y) = u` on `[y0, y1]` where `H` is the cubic Hermite interpolant with
/// values `f0 ≤ u ≤ f1` and slopes `m0`, `m1`, after Fritsch–Carlson limiting so
/// that `H` is monotone.
pub fn hermite_invert(y0: f64, y1: f64, f0: f64, f1: f64, m0: f64, m1: f64, u: f64) -> f64 {
    let h = y1 - y0;
    let df = f1 - f0;
    if !(df > 0.0) {
        return y0 + 0.5 * h;
    }
    let (m0, m1) = limit_slopes(m0, m1, df / h);
    let target = ((u - f0) / df).clamp(0.0, 1.0);
    // normalized cubic on s ∈ [0, 1]: p(s) = (H(y0 + s h) − f0)/df
    let (a, b) = (m0 * h / df, m1 * h / df);
    let p = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (s3 - 2.0 * s2 + s) * a + (-2.0 * s3 + 3.0 * s2) + (s3 - s2) * b
    };
    let dp = |s: f64| (3.0 * s * s - 4.0 * s + 1.0) * a + (-6.0 * s * s + 6.0 * s) + (3.0 * s * s - 2.0 * s) * b;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut s = target;
    for _ in 0..60 {
        let g = p(s) - target;
        if g.abs() < 1e-15 {
            break;
        }
        if g > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d = dp(s);
        let next = s - g / d;
        s = if d > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-16 {
            break;
        }
    }
    y0 + s * h
}

/// A density tabulated on an increasing grid covering its support, with its
/// cumulative integral prepared for inversion.
#[derive(Clone, Debug)]
pub struct TabulatedDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedDensity {
    /// `values` must be nonnegative and integrate to 1 within 1e-6; the result is
    /// renormalized exactly.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 3 {
            return Err(Error::InvalidDensity("grid and values need equal length ≥ 3".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDensity("grid must increase strictly".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDensity(format!("negative or non-finite value {v}")));
        }
        let slopes = finite_difference_slopes(&grid, &values);
        let mut cdf = Vec::with_capacity(grid.len());
        cdf.push(0.0);
        for i in 0..grid.len() - 1 {
            let h = grid[i + 1] - grid[i];
            // integral of the cubic Hermite interpolant of the density on the cell
            let cell = 0.5 * h * (values[i] + values[i + 1]) + h * h * (slopes[i] - slopes[i + 1]) / 12.0;
            cdf.push(cdf[i] + cell.max(0.0));
        }
        let total = *cdf.last().unwrap();
        if !((total - 1.0).abs() <= 1e-6) {
            return Err(Error::NotNormalized { integral: total });
        }
        for c in &mut cdf {
            *c /= total;
        }
        let density = values.iter().map(|v| v / total).collect();
        Ok(TabulatedDensity { grid, density, cdf })
    }

    /// Tabulates `f` on `points` uniform nodes over `[a, b]`.
    pub fn from_fn(a: f64, b: f64, points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid: Vec<f64> = (0..points)
            .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
            .collect();
        let values = grid.iter().map(|&y| f(y)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Interpolated distribution function.
    pub fn cdf(&self, y: f64) -> f64 {
        let n = self.grid.len();
        if y <= self.grid[0] {
            return 0.0;
        }
        if y >= self.grid[n - 1] {
            return 1.0;
        }
        let i = self.grid.partition_point(|&g| g <= y) - 1;
        let (y0, y1) = (self.grid[i], self.grid[i + 1]);
        let h = y1 - y0;
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = limit_slopes(self.density[i], self.density[i + 1], (f1 - f0) / h);
        let s = (y - y0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * h * m0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * h * m1
    }

    /// `F⁻¹(u)`; `u = 0` and `u = 1` map to the ends of the support.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InverseCdf(format!("uniform variate {u} outside [0, 1]")));
        }
        let n = self.grid.len();
        if u == 0.0 {
            let first = self.cdf.iter().position(|&c| c > 0.0).unwrap_or(1);
            return Ok(self.grid[first - 1]);
        }
        if u == 1.0 {
            let last = self.cdf.iter().position(|&c| c >= 1.0).unwrap_or(n - 1);
            return Ok(self.grid[last]);
        }
        let i = (self.cdf.partition_point(|&c| c <= u)).clamp(1, n - 1) - 1;
        Ok(hermite_invert(
            self.grid[i],
            self.grid[i + 1],
            self.cdf[i],
            self.cdf[i + 1],
            self.density[i],
            self.density[i + 1],
            u,
        ))
    }
}

/// Three-point finite-difference slopes on a nonuniform grid.
fn finite_difference_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut s = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        // derivative of the quadratic through (a, b, c), evaluated at x[i]
        let (xa, xb, xc, xi) = (x[a], x[b], x[c], x[i]);
        s[i] = y[a] * (2.0 * xi - xb - xc) / ((xa - xb) * (xa - xc))
            + y[b] * (2.0 * xi - xa - xc) / ((xb - xa) * (xb - xc))
            + y[c] * (2.0 * xi - xa - xb) / ((xc - xa) * (xc - xb));
    }
    s
}

/// Draws `F⁻¹(u)` from a tabulated density.
pub fn inverse_cdf_sample(density: &TabulatedDensity, u: f64) -> Result<f64> {
    density.quantile(u)
}
