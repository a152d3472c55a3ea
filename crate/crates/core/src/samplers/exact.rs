//! Exact grid sampling of the process conditioned to stay below one up to time `n`.
//!
//! From `x` at time `t`, the next grid value after a step `Δ` has density
//!
//! ```text
//! p(y) ∝ R_Δ(x, y) · P^y(τ > n − t − Δ)
//!      ∝ Σ_k w_k(x) · y J_α(j_k y) (2 / J_{α+1}(j_k)²) · W(y),   w_k = h_k(x)/h_1(x) · e^{−(j_k² − j_1²)Δ/2}
//! ```
//!
//! with `W(y) = y^α P^y(τ > s) e^{j_1² s/2}` expanded in the same Bessel modes
//! (or `W = J_α(j_1 y)` for an infinite horizon). The `x`-independent pieces are
//! tabulated once per step on a uniform grid, so each draw is a binary search
//! on `Σ_k w_k C_k(y)` followed by a monotone cubic inversion inside one cell.

use super::inverse::{hermite_invert, DEFAULT_TABLE_POINTS};
use super::{check_interior_start, validate_grid, PathMeta, PathSample, RngSpec, SamplerKind};
use crate::error::{domain, Error, Result};
use crate::kernels::SpectralKernel;
use crate::quad::gauss_legendre;
use crate::specfun::j_unchecked;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CELL_ORDER: usize = 4;

/// Tabulated Bessel modes on a uniform grid of `[0, 1]`, shared by all steps.
pub struct ExactSampler<'a> {
    kernel: &'a SpectralKernel,
    cells: usize,
    modes: usize,
    /// `J_α(j_k y_j)` at the grid nodes, mode-major.
    at_nodes: Vec<Vec<f64>>,
    /// `J_α(j_k y_q)` at the Gauss points of every cell, mode-major.
    at_cells: Vec<Vec<f64>>,
    cell_points: Vec<f64>,
    cell_weights: Vec<f64>,
}

/// The `x`-independent part of one transition: cumulative integrals and
/// densities of each mode, node-major.
pub struct StepTable {
    cells: usize,
    terms: usize,
    /// `e^{−(j_k² − j_1²)Δ/2}`
    damping: Vec<f64>,
    cumulative: Vec<f64>,
    density: Vec<f64>,
    dt: f64,
}

impl<'a> ExactSampler<'a> {
    /// Prepares tables holding `modes` Bessel modes on `cells` uniform cells.
    pub fn new(kernel: &'a SpectralKernel, modes: usize, cells: usize) -> Result<Self> {
        if cells < 16 {
            return Err(Error::Grid("inverse-CDF table needs at least 16 cells".into()));
        }
        if modes == 0 || modes > kernel.mode_count() {
            return Err(Error::IndexOutOfRange {
                index: modes,
                len: kernel.mode_count(),
            });
        }
        let alpha = kernel.alpha();
        let (gx, gw) = gauss_legendre(CELL_ORDER);
        let h = 1.0 / cells as f64;
        let mut cell_points = Vec::with_capacity(cells * CELL_ORDER);
        let mut cell_weights = Vec::with_capacity(cells * CELL_ORDER);
        for c in 0..cells {
            let left = c as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                cell_points.push(left + 0.5 * h * (x + 1.0));
                cell_weights.push(0.5 * h * w);
            }
        }
        let nodes: Vec<f64> = (0..=cells).map(|j| j as f64 * h).collect();
        let (at_nodes, at_cells) = (0..modes)
            .into_par_iter()
            .map(|k| {
                let j = kernel.mode_j(k);
                let a: Vec<f64> = nodes.iter().map(|&y| j_unchecked(alpha, j * y)).collect();
                let b: Vec<f64> = cell_points.iter().map(|&y| j_unchecked(alpha, j * y)).collect();
                (a, b)
            })
            .unzip();
        Ok(ExactSampler {
            kernel,
            cells,
            modes,
            at_nodes,
            at_cells,
            cell_points,
            cell_weights,
        })
    }

    /// Tables sized for every step of `grid` with horizon `n`.
    pub fn for_grid(kernel: &'a SpectralKernel, grid: &[f64], n: f64) -> Result<Self> {
        let mut modes = 1;
        for w in grid.windows(2) {
            let dt = w[1] - w[0];
            modes = modes.max(kernel.terms(dt, false)?);
            if n.is_finite() {
                modes = modes.max(kernel.terms(n - w[1], true)?);
            }
        }
        Self::new(kernel, modes, DEFAULT_TABLE_POINTS)
    }

    /// Transition table for a step `dt` after which `remaining` time is left
    /// until the horizon (`f64::INFINITY` for the limit process).
    pub fn step_table(&self, dt: f64, remaining: f64) -> Result<StepTable> {
        let k = self.kernel;
        let terms = k.terms(dt, false)?;
        let weight_terms = if remaining.is_finite() { k.terms(remaining, true)? } else { 1 };
        if terms.max(weight_terms) > self.modes {
            return Err(Error::IndexOutOfRange {
                index: terms.max(weight_terms),
                len: self.modes,
            });
        }
        let j1sq = k.j1() * k.j1();
        let weight_coeffs: Vec<f64> = if remaining.is_finite() {
            (0..weight_terms)
                .map(|l| {
                    let j = k.mode_j(l);
                    k.mode_surv(l) * (-0.5 * (j * j - j1sq) * remaining).exp()
                })
                .collect()
        } else {
            vec![1.0]
        };
        let weight = |vals: &Vec<Vec<f64>>, q: usize| -> f64 {
            weight_coeffs.iter().enumerate().map(|(l, c)| c * vals[l][q]).sum()
        };
        let w_nodes: Vec<f64> = (0..=self.cells).map(|j| weight(&self.at_nodes, j)).collect();
        let w_cells: Vec<f64> = (0..self.cell_points.len()).map(|q| weight(&self.at_cells, q)).collect();

        let stride = terms;
        let mut cumulative = vec![0.0; (self.cells + 1) * stride];
        let mut density = vec![0.0; (self.cells + 1) * stride];
        let h = 1.0 / self.cells as f64;
        for m in 0..terms {
            let norm = k.mode_inv_norm(m);
            let mut acc = 0.0;
            for c in 0..self.cells {
                let mut cell = 0.0;
                let span = c * CELL_ORDER..(c + 1) * CELL_ORDER;
                for (((w, p), a), wc) in self.cell_weights[span.clone()]
                    .iter()
                    .zip(&self.cell_points[span.clone()])
                    .zip(&self.at_cells[m][span.clone()])
                    .zip(&w_cells[span])
                {
                    cell += w * p * a * wc;
                }
                acc += norm * cell;
                cumulative[(c + 1) * stride + m] = acc;
            }
            for j in 0..=self.cells {
                let y = j as f64 * h;
                density[j * stride + m] = norm * y * self.at_nodes[m][j] * w_nodes[j];
            }
        }
        let damping = (0..terms)
            .map(|m| {
                let j = k.mode_j(m);
                (-0.5 * (j * j - j1sq) * dt).exp()
            })
            .collect();
        Ok(StepTable {
            cells: self.cells,
            terms,
            damping,
            cumulative,
            density,
            dt,
        })
    }

    pub fn kernel(&self) -> &SpectralKernel {
        self.kernel
    }
}

impl StepTable {
    fn weights(&self, kernel: &SpectralKernel, x: f64) -> Vec<f64> {
        (0..self.terms).map(|m| kernel.h_ratio(m, x) * self.damping[m]).collect()
    }

    fn dot(&self, table: &[f64], j: usize, w: &[f64]) -> f64 {
        let row = &table[j * self.terms..(j + 1) * self.terms];
        row.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// Unnormalized distribution function at the grid nodes, from `x`.
    pub fn node_cdf(&self, kernel: &SpectralKernel, x: f64) -> Vec<f64> {
        let w = self.weights(kernel, x);
        (0..=self.cells).map(|j| self.dot(&self.cumulative, j, &w)).collect()
    }

    /// Draws the next value from `x` with the uniform variate `u`.
    pub fn draw(&self, kernel: &SpectralKernel, x: f64, u: f64) -> Result<f64> {
        let w = self.weights(kernel, x);
        let total = self.dot(&self.cumulative, self.cells, &w);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InverseCdf(format!(
                "transition from x = {x} over dt = {} has total mass {total}",
                self.dt
            )));
        }
        let target = u * total;
        let (mut lo, mut hi) = (0usize, self.cells);
        let mut f_lo = 0.0;
        let mut f_hi = total;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let f = self.dot(&self.cumulative, mid, &w);
            if f <= target {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
                f_hi = f;
            }
        }
        let h = 1.0 / self.cells as f64;
        let m0 = self.dot(&self.density, lo, &w);
        let m1 = self.dot(&self.density, hi, &w);
        let y = hermite_invert(lo as f64 * h, hi as f64 * h, f_lo, f_hi, m0, m1, target);
        Ok(y.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
    }
}

fn check_exact_inputs(kernel: &SpectralKernel, x0: f64, grid: &[f64], n: f64) -> Result<()> {
    check_interior_start(x0)?;
    validate_grid(grid)?;
    let last = *grid.last().unwrap();
    if !(n > last) {
        return Err(domain("n", n, "horizon must exceed the last grid time"));
    }
    for w in grid.windows(2) {
        if w[1] - w[0] < kernel.t_min() {
            return Err(Error::SeriesRegime {
                t: w[1] - w[0],
                t_min: kernel.t_min(),
            });
        }
    }
    if n.is_finite() && n - last < kernel.t_min() {
        return Err(Error::SeriesRegime {
            t: n - last,
            t_min: kernel.t_min(),
        });
    }
    Ok(())
}

fn meta(seed: u64, stream: u64, n: f64) -> PathMeta {
    PathMeta {
        sampler: SamplerKind::Exact,
        seed,
        stream,
        step: 0.0,
        horizon: n.is_finite().then_some(n),
        infinite_horizon: n.is_infinite(),
        accepted: true,
        attempts: 1,
        warning: None,
    }
}

/// One exact path on `grid`; `n = f64::INFINITY` samples the limit diffusion.
pub fn sample_conditioned_exact(
    x0: f64,
    grid: &[f64],
    n: f64,
    kernel: &SpectralKernel,
    rng: RngSpec,
) -> Result<PathSample> {
    let mut paths = run_batch(x0, grid, n, kernel, rng.seed, rng.stream..rng.stream + 1)?;
    Ok(paths.pop().expect("one path requested"))
}

/// `count` exact paths advanced together step by step; path `i` uses stream `i`.
pub fn sample_conditioned_exact_batch(
    x0: f64,
    grid: &[f64],
    n: f64,
    kernel: &SpectralKernel,
    seed: u64,
    count: usize,
) -> Result<Vec<PathSample>> {
    run_batch(x0, grid, n, kernel, seed, 0..count as u64)
}

fn run_batch(
    x0: f64,
    grid: &[f64],
    n: f64,
    kernel: &SpectralKernel,
    seed: u64,
    streams: std::ops::Range<u64>,
) -> Result<Vec<PathSample>> {
    check_exact_inputs(kernel, x0, grid, n)?;
    let sampler = ExactSampler::for_grid(kernel, grid, n)?;
    let mut states: Vec<(ChaCha8Rng, Vec<f64>)> = streams
        .clone()
        .map(|s| {
            let mut v = Vec::with_capacity(grid.len());
            v.push(x0);
            (RngSpec::new(seed, s).rng(), v)
        })
        .collect();
    for w in grid.windows(2) {
        let table = sampler.step_table(w[1] - w[0], n - w[1])?;
        states.par_iter_mut().try_for_each(|(rng, values)| -> Result<()> {
            let x = *values.last().unwrap();
            let u: f64 = rng.random();
            values.push(table.draw(kernel, x, u)?);
            Ok(())
        })?;
    }
    Ok(states
        .into_iter()
        .zip(streams)
        .map(|((_, values), s)| PathSample {
            times: grid.to_vec(),
            values,
            meta: meta(seed, s, n),
        })
        .collect())
}
