//! Goodness-of-fit statistics: Kolmogorov–Smirnov (one and two sample) and Pearson χ².

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    /// Supremum distance between the distribution functions.
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size entering the Kolmogorov limit law.
    pub effective_n: f64,
}

impl KsResult {
    /// Distance above which the test rejects at level `alpha`.
    pub fn critical(&self, alpha: f64) -> f64 {
        ks_critical(self.effective_n, alpha)
    }
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2 k² λ²)`, the Kolmogorov tail.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn stephens_lambda(n: f64, d: f64) -> f64 {
    let s = n.sqrt();
    (s + 0.12 + 0.11 / s) * d
}

/// p-value for a KS distance `d` at effective size `n`.
pub fn ks_p_value(n: f64, d: f64) -> f64 {
    kolmogorov_tail(stephens_lambda(n, d))
}

/// Distance at which the KS p-value equals `alpha`.
pub fn ks_critical(n: f64, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ks_p_value(n, mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Verification("KS test needs at least one sample".into()));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::Verification("KS test got a NaN sample".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample test against a continuous distribution function.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(n, d),
        effective_n: n,
    })
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(ne, d),
        effective_n: ne,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Pearson χ² of observed counts against expected probabilities (normalized internally).
pub fn chi_squared(observed: &[f64], expected_prob: &[f64]) -> Result<ChiSquaredResult> {
    chi_squared_with_dof(observed, expected_prob, observed.len().saturating_sub(1) as f64)
}

/// Pearson χ² with an explicit number of degrees of freedom.
pub fn chi_squared_with_dof(observed: &[f64], expected_prob: &[f64], dof: f64) -> Result<ChiSquaredResult> {
    if observed.len() != expected_prob.len() || observed.len() < 2 {
        return Err(Error::Verification("χ² needs matching bins, at least two".into()));
    }
    let total: f64 = observed.iter().sum();
    let norm: f64 = expected_prob.iter().sum();
    let mut stat = 0.0;
    for (o, p) in observed.iter().zip(expected_prob) {
        let e = total * p / norm;
        if !(e > 0.0) {
            return Err(Error::Verification("χ² bin with zero expected count".into()));
        }
        stat += (o - e) * (o - e) / e;
    }
    Ok(ChiSquaredResult {
        statistic: stat,
        dof,
        p_value: chi_squared_sf(stat, dof)?,
    })
}

/// Upper tail `P(χ²_dof > stat)`.
pub fn chi_squared_sf(stat: f64, dof: f64) -> Result<f64> {
    let dist = ChiSquared::new(dof).map_err(|e| Error::Verification(format!("χ² law: {e}")))?;
    Ok(dist.sf(stat))
}

/// Smallest statistic that rejects at level `alpha`.
pub fn chi_squared_critical(dof: f64, alpha: f64) -> Result<f64> {
    let dist = ChiSquared::new(dof).map_err(|e| Error::Verification(format!("χ² law: {e}")))?;
    Ok(dist.inverse_cdf(1.0 - alpha))
}

/// Histogram of `samples` over bins `[edges[b], edges[b+1])`, the last bin closed.
pub fn histogram(samples: &[f64], edges: &[f64]) -> Vec<f64> {
    let nb = edges.len().saturating_sub(1);
    let mut counts = vec![0.0; nb];
    if nb == 0 {
        return counts;
    }
    for &v in samples {
        if v < edges[0] || v > edges[nb] {
            continue;
        }
        let b = edges.partition_point(|&e| e <= v).saturating_sub(1).min(nb - 1);
        counts[b] += 1.0;
    }
    counts
}
