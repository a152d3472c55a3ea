//! Euler–Maruyama schemes for the free Bessel process and the limit diffusion.

use super::{check_interior_start, validate_grid, PathMeta, PathSample, RngSpec, SamplerKind};
use crate::error::{domain, Error, Result};
use crate::kernels::SpectralKernel;
use crate::specfun::BesselParams;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Steps above this size get a coarse-grid warning attached to the path.
pub const COARSE_STEP: f64 = 0.01;

/// Largest step accepted by the limit-diffusion scheme.
pub const LIMIT_MAX_STEP: f64 = 0.005;

/// Consecutive halvings of a rejected limit step before the scheme gives up.
const MAX_HALVINGS: u32 = 50;

/// Floor on the boundary-driven substep cap of both schemes.
const STEP_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdeConfig {
    /// Upper bound on every internal step.
    pub max_step: f64,
    /// Near a boundary at distance `m` the step is capped at `(c·m)²`
    /// (and at `c·m/|b|` for the limit drift `b`).
    pub boundary_factor: f64,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            max_step: 1e-3,
            boundary_factor: 0.25,
        }
    }
}

impl SdeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.max_step > 0.0) || !self.max_step.is_finite() {
            return Err(domain("max_step", self.max_step, "must be positive"));
        }
        if !(self.boundary_factor > 0.0 && self.boundary_factor <= 1.0) {
            return Err(domain("boundary_factor", self.boundary_factor, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// One reflected Euler step `|y + (d−1)Δ/(2y) + √Δ ξ|` of `dY = dB + (d−1)/(2Y) dt`.
pub fn bessel_euler_step(params: &BesselParams, y: f64, dt: f64, noise: f64) -> f64 {
    (y + (params.d() - 1.0) * dt / (2.0 * y) + dt.sqrt() * noise).abs()
}

/// Advances the free process from `y` over `span`, returning the new value.
pub(crate) fn advance_bessel<R: Rng>(
    params: &BesselParams,
    cfg: &SdeConfig,
    mut y: f64,
    span: f64,
    rng: &mut R,
    mut on_step: impl FnMut(&mut R, f64, f64, f64) -> bool,
) -> Option<f64> {
    let mut left = span;
    while left > 0.0 {
        let cap = (cfg.boundary_factor * y).powi(2).max(STEP_FLOOR);
        let dt = left.min(cfg.max_step).min(cap);
        let z: f64 = rng.sample(StandardNormal);
        let next = bessel_euler_step(params, y, dt, z);
        if !on_step(rng, y, next, dt) {
            return None;
        }
        y = next;
        left = if dt >= left { 0.0 } else { left - dt };
    }
    Some(y)
}

fn coarse_warning(cfg: &SdeConfig) -> Option<String> {
    (cfg.max_step > COARSE_STEP).then(|| {
        format!(
            "coarse step {} exceeds {}; Euler bias may be visible",
            cfg.max_step, COARSE_STEP
        )
    })
}

/// Euler–Maruyama path of the free Bessel process, recorded on `grid`.
pub fn sample_bessel_path(
    x0: f64,
    grid: &[f64],
    params: &BesselParams,
    cfg: &SdeConfig,
    rng: RngSpec,
) -> Result<PathSample> {
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(domain("x0", x0, "start must be positive"));
    }
    validate_grid(grid)?;
    cfg.validate()?;
    let mut r = rng.rng();
    let mut values = Vec::with_capacity(grid.len());
    values.push(x0);
    let mut y = x0;
    for w in grid.windows(2) {
        y = advance_bessel(params, cfg, y, w[1] - w[0], &mut r, |_, _, _, _| true).expect("never stopped");
        values.push(y);
    }
    Ok(PathSample {
        times: grid.to_vec(),
        values,
        meta: PathMeta {
            sampler: SamplerKind::Bessel,
            seed: rng.seed,
            stream: rng.stream,
            step: cfg.max_step,
            horizon: None,
            infinite_horizon: false,
            accepted: true,
            attempts: 1,
            warning: coarse_warning(cfg),
        },
    })
}

/// `count` independent free paths; path `i` uses stream `i`.
pub fn sample_bessel_batch(
    x0: f64,
    grid: &[f64],
    params: &BesselParams,
    cfg: &SdeConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<PathSample>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_bessel_path(x0, grid, params, cfg, RngSpec::new(seed, i)))
        .collect()
}

/// Euler–Maruyama path of the limit diffusion `dX = dB + b(X) dt` on `(0, 1)`.
///
/// Steps shrink near the boundaries to at most `(c·m)²` and `c·m/|b(x)|`, where
/// `m` is the distance to the nearer boundary, but never below `STEP_FLOOR`. A
/// proposal leaving `(0, 1)` is discarded and retried with half the step and
/// fresh noise.
pub fn sample_limit_sde(
    x0: f64,
    grid: &[f64],
    kernel: &SpectralKernel,
    cfg: &SdeConfig,
    rng: RngSpec,
) -> Result<PathSample> {
    check_interior_start(x0)?;
    validate_grid(grid)?;
    cfg.validate()?;
    if cfg.max_step > LIMIT_MAX_STEP {
        return Err(domain("max_step", cfg.max_step, "limit diffusion needs steps ≤ 0.005"));
    }
    let mut r = rng.rng();
    let mut values = Vec::with_capacity(grid.len());
    values.push(x0);
    let mut x = x0;
    let c = cfg.boundary_factor;
    for w in grid.windows(2) {
        let (start, span) = (w[0], w[1] - w[0]);
        let mut left = span;
        while left > 0.0 {
            let m = x.min(1.0 - x);
            let b = kernel.drift_unchecked(x);
            let cap = (c * m).powi(2).min(c * m / b.abs()).max(STEP_FLOOR);
            let mut dt = left.min(cfg.max_step).min(cap);
            let mut halvings = 0;
            loop {
                let z: f64 = r.sample(StandardNormal);
                let next = x + b * dt + dt.sqrt() * z;
                if next > 0.0 && next < 1.0 {
                    x = next;
                    break;
                }
                dt *= 0.5;
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::StepUnderflow {
                        min_step: dt,
                        x,
                        t: start + span - left,
                    });
                }
            }
            left = if dt >= left { 0.0 } else { left - dt };
        }
        values.push(x);
    }
    Ok(PathSample {
        times: grid.to_vec(),
        values,
        meta: PathMeta {
            sampler: SamplerKind::Limit,
            seed: rng.seed,
            stream: rng.stream,
            step: cfg.max_step,
            horizon: None,
            infinite_horizon: true,
            accepted: true,
            attempts: 1,
            warning: None,
        },
    })
}

pub fn sample_limit_batch(
    x0: f64,
    grid: &[f64],
    kernel: &SpectralKernel,
    cfg: &SdeConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<PathSample>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_limit_sde(x0, grid, kernel, cfg, RngSpec::new(seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_step_is_deterministic_euler() {
        let p = BesselParams::new(3.0).unwrap();
        let y = bessel_euler_step(&p, 0.5, 0.01, 0.0);
        assert!((y - (0.5 + 2.0 * 0.01 / 1.0)).abs() < 1e-15);
    }

    #[test]
    fn paths_respect_grid_and_support() {
        let k = SpectralKernel::with_dimension(2.0).unwrap();
        let grid = super::super::uniform_grid(0.5, 10).unwrap();
        let p = sample_limit_sde(0.5, &grid, &k, &SdeConfig::default(), RngSpec::new(1, 0)).unwrap();
        assert_eq!(p.values.len(), grid.len());
        assert!(p.values.iter().all(|&v| v > 0.0 && v < 1.0));
        let again = sample_limit_sde(0.5, &grid, &k, &SdeConfig::default(), RngSpec::new(1, 0)).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn coarse_steps_are_flagged() {
        let p = BesselParams::new(2.0).unwrap();
        let cfg = SdeConfig {
            max_step: 0.05,
            ..Default::default()
        };
        let s = sample_bessel_path(1.0, &[0.0, 0.2], &p, &cfg, RngSpec::new(0, 0)).unwrap();
        assert!(s.meta.warning.is_some());
        let k = SpectralKernel::with_dimension(2.0).unwrap();
        assert!(sample_limit_sde(0.5, &[0.0, 0.2], &k, &cfg, RngSpec::new(0, 0)).is_err());
    }
}
