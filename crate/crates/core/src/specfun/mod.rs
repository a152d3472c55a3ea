//! Bessel functions of the first kind, their positive zeros, and the
//! eigenfunctions `h_i(x) = x^{-α} J_α(j_{i,α} x)` of the Bessel generator on `[0, 1]`.

mod bessel;
mod gamma;
mod zeros;

pub use bessel::{
    bessel_i, bessel_j, bessel_j_derivative, j_asymptotic, j_continued_fraction, j_series,
    ln_bessel_i_scaled, ASYMPTOTIC_LIMIT, I_OVERFLOW, MAX_ARGUMENT, MAX_ORDER, SERIES_LIMIT,
};
pub(crate) use bessel::{j_ratio, j_unchecked};
pub use gamma::{gamma, ln_gamma};
pub(crate) use zeros::eigen_value;
pub use zeros::{compute_zeros, eigenfunction_h, eigenfunction_norm_sq, ZeroTable, SPACING_GUARD};

use crate::error::{Error, Result};

/// Dimension `d` of the Bessel process together with its order `α = (d − 2)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselParams {
    d: f64,
    alpha: f64,
}

impl BesselParams {
    pub fn new(d: f64) -> Result<Self> {
        let alpha = 0.5 * (d - 2.0);
        if !d.is_finite() || d < 2.0 || alpha > MAX_ORDER {
            return Err(Error::Dimension(d));
        }
        Ok(BesselParams { d, alpha })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}
