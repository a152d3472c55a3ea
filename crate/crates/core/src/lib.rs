//! Bessel processes conditioned to stay below level one.
//!
//! The crate evaluates the Fourier–Bessel spectral kernels of a Bessel process
//! of dimension `d ≥ 2` killed at 1, the Doob-transformed limit kernel obtained
//! by conditioning on survival up to an ever longer horizon, and the associated
//! diffusion on `[0, 1]` with generator
//! `½ d²/dx² + (d/dx log(x^{1/2} J_α(j_{1,α} x))) d/dx`, `α = (d − 2)/2`.
//! Samplers for the free, conditioned and limiting processes and a harness of
//! numerical checks are built on top.

pub mod cli;
pub mod csvfmt;
pub mod error;
pub mod kernels;
pub mod quad;
pub mod samplers;
pub mod specfun;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use kernels::{KernelConfig, SpectralKernel};
pub use specfun::{BesselParams, ZeroTable};
