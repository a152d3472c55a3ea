//! Path and marginal samplers for the free Bessel process, the process
//! conditioned to stay below one up to a horizon `n`, and the limit diffusion.
//!
//! Every batch entry point gives path `i` its own ChaCha stream `(seed, i)`, so
//! output is bit-for-bit identical for any number of worker threads.

mod exact;
mod inverse;
mod rejection;
mod sde;

pub use exact::{sample_conditioned_exact, sample_conditioned_exact_batch, ExactSampler};
pub use inverse::{hermite_invert, inverse_cdf_sample, TabulatedDensity, DEFAULT_TABLE_POINTS};
pub use rejection::{
    rejection_acceptance_rate, sample_conditioned_rejection, sample_conditioned_rejection_batch,
    AcceptanceEstimate, RejectionConfig,
};
pub use sde::{
    bessel_euler_step, sample_bessel_batch, sample_bessel_path, sample_limit_batch, sample_limit_sde,
    SdeConfig, COARSE_STEP, LIMIT_MAX_STEP,
};

use crate::csvfmt::fmt17;
use crate::error::{domain, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// A reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Euler scheme for the unconstrained Bessel process.
    Bessel,
    /// Sequential inverse-CDF draws from the conditioned one-step kernel.
    Exact,
    /// Free paths accepted when they stay below one up to the horizon.
    Rejection,
    /// Euler scheme for the limit diffusion on `[0, 1]`.
    Limit,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Bessel,
        SamplerKind::Exact,
        SamplerKind::Rejection,
        SamplerKind::Limit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Bessel => "bessel",
            SamplerKind::Exact => "exact",
            SamplerKind::Rejection => "rejection",
            SamplerKind::Limit => "limit",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config {
                field: "sampler".into(),
                message: format!("unknown sampler `{s}` (expected bessel, exact, rejection or limit)"),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathMeta {
    pub sampler: SamplerKind,
    pub seed: u64,
    pub stream: u64,
    /// Largest internal step; zero for the exact sampler.
    pub step: f64,
    /// Conditioning horizon; `None` when unconditioned or infinite.
    pub horizon: Option<f64>,
    pub infinite_horizon: bool,
    pub accepted: bool,
    /// Number of proposals drawn (1 for samplers without rejection).
    pub attempts: u64,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: PathMeta,
}

impl PathSample {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// `t,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", fmt17(*t), fmt17(*v)));
        }
        out
    }
}

/// `sample_index,value` rows for a batch of marginal draws.
pub fn marginals_to_csv(values: &[f64]) -> String {
    let mut out = String::from("sample_index,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt17(*v)));
    }
    out
}

/// `steps` equal steps from 0 to `t_end`, ending exactly at `t_end`.
pub fn uniform_grid(t_end: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(domain("t_end", t_end, "grid end must be positive and finite"));
    }
    if steps == 0 {
        return Err(Error::Grid("a grid needs at least one step".into()));
    }
    let mut g: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    g[steps] = t_end;
    Ok(g)
}

/// Checks that `grid` starts at 0 and increases strictly.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        None => return Err(Error::Grid("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => return Err(Error::Grid(format!("grid starts at {t0}, expected 0"))),
        _ => {}
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::Grid(format!("grid not strictly increasing at {} -> {}", w[0], w[1])));
        }
    }
    Ok(())
}

pub(crate) fn check_interior_start(x0: f64) -> Result<()> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(domain("x0", x0, "start must lie strictly inside (0, 1)"));
    }
    Ok(())
}
