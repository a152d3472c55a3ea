//! Conditioning by rejection: free Bessel paths are simulated up to the horizon
//! and kept only if they never reach level one.
//!
//! Between two Euler values `a, b < 1` over a step `Δ` the path is also killed with
//! probability `exp(−2(1−a)(1−b)/Δ)`, the chance that a Brownian bridge between
//! them crosses one. The drift is treated as frozen over the step, so this is an
//! approximation whose error vanishes with the step size.

use super::sde::{advance_bessel, SdeConfig};
use super::{validate_grid, PathMeta, PathSample, RngSpec, SamplerKind};
use crate::error::{domain, Error, Result};
use crate::specfun::BesselParams;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Attempts simulated in parallel before the batch checks whether it has enough.
const ATTEMPT_CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RejectionConfig {
    pub sde: SdeConfig,
    /// Budget of proposals; a single path and a whole batch both stop here.
    pub max_attempts: u64,
}

impl Default for RejectionConfig {
    fn default() -> Self {
        RejectionConfig {
            sde: SdeConfig::default(),
            max_attempts: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcceptanceEstimate {
    pub attempts: u64,
    pub accepted: u64,
    pub rate: f64,
}

impl AcceptanceEstimate {
    pub fn new(attempts: u64, accepted: u64) -> Self {
        AcceptanceEstimate {
            attempts,
            accepted,
            rate: accepted as f64 / attempts.max(1) as f64,
        }
    }

    /// Standard error of the rate under success probability `p`.
    pub fn std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.attempts as f64).sqrt()
    }
}

/// Event times: the grid merged with the horizon.
fn schedule(grid: &[f64], n: f64) -> Vec<(f64, bool)> {
    let mut times: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
    if n > 0.0 {
        match times.iter().position(|&(t, _)| t >= n) {
            Some(i) if times[i].0 == n => {}
            Some(i) => times.insert(i, (n, false)),
            None => times.push((n, false)),
        }
    }
    times
}

/// One proposal; `Some(values on the grid)` if it survives up to `n`.
fn attempt<R: Rng>(
    x0: f64,
    events: &[(f64, bool)],
    n: f64,
    params: &BesselParams,
    cfg: &SdeConfig,
    rng: &mut R,
) -> Option<Vec<f64>> {
    let mut values = Vec::with_capacity(events.len());
    values.push(x0);
    let mut y = x0;
    for w in events.windows(2) {
        let ((t0, _), (t1, record)) = (w[0], w[1]);
        let watched = t0 < n;
        y = advance_bessel(params, cfg, y, t1 - t0, rng, |r, a, b, dt| {
            if !watched {
                return true;
            }
            if b >= 1.0 {
                return false;
            }
            let cross = (-2.0 * (1.0 - a) * (1.0 - b) / dt).exp();
            cross == 0.0 || r.random::<f64>() >= cross
        })?;
        if record {
            values.push(y);
        }
    }
    Some(values)
}

fn check_inputs(x0: f64, grid: &[f64], n: f64) -> Result<()> {
    validate_grid(grid)?;
    if !(n >= 0.0) || !n.is_finite() {
        return Err(domain("n", n, "horizon must be finite and nonnegative"));
    }
    if n > 0.0 && !(x0 > 0.0 && x0 < 1.0) {
        return Err(domain("x0", x0, "start must lie strictly inside (0, 1)"));
    }
    if !(x0 > 0.0) {
        return Err(domain("x0", x0, "start must be positive"));
    }
    Ok(())
}

fn meta(seed: u64, stream: u64, n: f64, cfg: &RejectionConfig, attempts: u64) -> PathMeta {
    PathMeta {
        sampler: SamplerKind::Rejection,
        seed,
        stream,
        step: cfg.sde.max_step,
        horizon: Some(n),
        infinite_horizon: false,
        accepted: true,
        attempts,
        warning: None,
    }
}

/// Draws proposals from one stream until one survives up to `n`.
/// With `n = 0` the first proposal is accepted and the path is a free path.
pub fn sample_conditioned_rejection(
    x0: f64,
    grid: &[f64],
    n: f64,
    params: &BesselParams,
    cfg: &RejectionConfig,
    rng: RngSpec,
) -> Result<PathSample> {
    check_inputs(x0, grid, n)?;
    let events = schedule(grid, n);
    let mut r = rng.rng();
    for k in 1..=cfg.max_attempts {
        if let Some(values) = attempt(x0, &events, n, params, &cfg.sde, &mut r) {
            return Ok(PathSample {
                times: grid.to_vec(),
                values,
                meta: meta(rng.seed, rng.stream, n, cfg, k),
            });
        }
    }
    Err(Error::AttemptsExhausted {
        attempts: cfg.max_attempts,
        accepted: 0,
        rate: 0.0,
    })
}

/// Collects the first `count` accepted proposals, where proposal `a` runs on
/// stream `a`. The attempt budget is shared by the whole batch.
pub fn sample_conditioned_rejection_batch(
    x0: f64,
    grid: &[f64],
    n: f64,
    params: &BesselParams,
    cfg: &RejectionConfig,
    seed: u64,
    count: usize,
) -> Result<(Vec<PathSample>, AcceptanceEstimate)> {
    check_inputs(x0, grid, n)?;
    let events = schedule(grid, n);
    let mut accepted: Vec<PathSample> = Vec::with_capacity(count);
    let mut next = 0u64;
    while accepted.len() < count {
        if next >= cfg.max_attempts {
            let est = AcceptanceEstimate::new(next, accepted.len() as u64);
            return Err(Error::AttemptsExhausted {
                attempts: next,
                accepted: accepted.len() as u64,
                rate: est.rate,
            });
        }
        let end = (next + ATTEMPT_CHUNK).min(cfg.max_attempts);
        let chunk: Vec<(u64, Option<Vec<f64>>)> = (next..end)
            .into_par_iter()
            .map(|a| {
                let mut r = RngSpec::new(seed, a).rng();
                (a, attempt(x0, &events, n, params, &cfg.sde, &mut r))
            })
            .collect();
        for (a, values) in chunk {
            if accepted.len() == count {
                break;
            }
            next = a + 1;
            if let Some(values) = values {
                accepted.push(PathSample {
                    times: grid.to_vec(),
                    values,
                    meta: meta(seed, a, n, cfg, 1),
                });
            }
        }
    }
    Ok((accepted, AcceptanceEstimate::new(next, count as u64)))
}

/// Fraction of `attempts` free paths from `x0` that stay below one up to `n`.
pub fn rejection_acceptance_rate(
    x0: f64,
    n: f64,
    params: &BesselParams,
    cfg: &SdeConfig,
    seed: u64,
    attempts: u64,
) -> Result<AcceptanceEstimate> {
    check_inputs(x0, &[0.0], n)?;
    if attempts == 0 {
        return Err(domain("attempts", 0.0, "need at least one attempt"));
    }
    let events = schedule(&[0.0], n);
    let accepted = (0..attempts)
        .into_par_iter()
        .filter(|&a| {
            let mut r = RngSpec::new(seed, a).rng();
            attempt(x0, &events, n, params, cfg, &mut r).is_some()
        })
        .count() as u64;
    Ok(AcceptanceEstimate::new(attempts, accepted))
}
