//! Statistical checks of the samplers against the analytic kernels.

use super::{params, run_check, VerificationReport, MIN_POWERED_SAMPLES, SIGNIFICANCE};
use crate::error::{Error, Result};
use crate::kernels::SpectralKernel;
use crate::quad::gauss_legendre;
use crate::samplers::{
    rejection_acceptance_rate, sample_bessel_batch, sample_conditioned_exact_batch,
    sample_conditioned_rejection_batch, sample_limit_batch, sample_limit_sde, RejectionConfig, RngSpec,
    SamplerKind, SdeConfig,
};
use crate::stats::{chi_squared, chi_squared_critical, histogram, ks_one_sample, ks_two_sample};
use rayon::prelude::*;

/// Cells of every tabulated reference CDF.
const CDF_CELLS: usize = 4000;

/// Pooled χ² cells need at least this many expected counts.
const MIN_EXPECTED: f64 = 5.0;

/// A distribution function tabulated on a uniform grid by cellwise Gauss–Legendre
/// integration of a density, linearly interpolated between nodes.
#[derive(Clone, Debug)]
pub struct CdfTable {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl CdfTable {
    /// Tabulates `∫_a^x density` with `cells` cells; the table is rescaled to end at 1
    /// and the mass found before rescaling is returned alongside.
    pub fn from_density(
        a: f64,
        b: f64,
        cells: usize,
        density: impl Fn(f64) -> Result<f64> + Sync,
    ) -> Result<(Self, f64)> {
        let (gx, gw) = gauss_legendre(6);
        let h = (b - a) / cells as f64;
        let masses = (0..cells)
            .into_par_iter()
            .map(|c| {
                let left = a + c as f64 * h;
                let mut m = 0.0;
                for (z, w) in gx.iter().zip(&gw) {
                    m += 0.5 * h * w * density(left + 0.5 * h * (z + 1.0))?;
                }
                Ok(m)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for m in masses {
            acc += m;
            values.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Verification("reference density has no mass".into()));
        }
        for v in values.iter_mut() {
            *v /= acc;
        }
        Ok((CdfTable { a, b, values }, acc))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        let cells = self.values.len() - 1;
        let s = (x - self.a) / (self.b - self.a) * cells as f64;
        let i = (s.floor() as usize).min(cells - 1);
        let f = s - i as f64;
        self.values[i] + f * (self.values[i + 1] - self.values[i])
    }
}

fn underpowered(r: VerificationReport, n: usize) -> VerificationReport {
    if n >= MIN_POWERED_SAMPLES {
        return r;
    }
    let note = format!("underpowered: {n} samples < {MIN_POWERED_SAMPLES}; not failed");
    VerificationReport {
        passed: true,
        tol: f64::INFINITY,
        ..r
    }
    .with_note(note)
}

fn ks_report(name: &str, p: String, samples: &[f64], table: &CdfTable) -> Result<VerificationReport> {
    let ks = ks_one_sample(samples, |x| table.cdf(x))?;
    let r = VerificationReport::new(name, p, ks.statistic, ks.critical(SIGNIFICANCE))
        .with_note(format!("KS p-value {:.4}", ks.p_value));
    Ok(underpowered(r, samples.len()))
}

/// Marginals at time `t` from `x0`.
#[allow(clippy::too_many_arguments)]
fn draw_marginals(
    kernel: &SpectralKernel,
    sampler: SamplerKind,
    count: usize,
    grid: &[f64],
    n: f64,
    x0: f64,
    seed: u64,
    max_attempts: u64,
) -> Result<Vec<Vec<f64>>> {
    let paths = match sampler {
        SamplerKind::Bessel => sample_bessel_batch(x0, grid, kernel.params(), &SdeConfig::default(), seed, count)?,
        SamplerKind::Limit => sample_limit_batch(x0, grid, kernel, &SdeConfig::default(), seed, count)?,
        SamplerKind::Exact => sample_conditioned_exact_batch(x0, grid, n, kernel, seed, count)?,
        SamplerKind::Rejection => {
            let cfg = RejectionConfig {
                max_attempts,
                ..Default::default()
            };
            sample_conditioned_rejection_batch(x0, grid, n, kernel.params(), &cfg, seed, count)?.0
        }
    };
    Ok(paths.into_iter().map(|p| p.values).collect())
}

/// Reference law of `X_t` from `x0` under `sampler` (horizon `n` for the conditioned ones).
fn reference_cdf(kernel: &SpectralKernel, sampler: SamplerKind, t: f64, n: f64, x0: f64) -> Result<CdfTable> {
    let table = match sampler {
        SamplerKind::Bessel => {
            let upper = x0 + 12.0 * t.sqrt();
            CdfTable::from_density(0.0, upper, CDF_CELLS, |y| kernel.free_density(x0, y, t))?.0
        }
        SamplerKind::Limit => CdfTable::from_density(0.0, 1.0, CDF_CELLS, |y| kernel.limit_density(x0, y, t))?.0,
        SamplerKind::Exact | SamplerKind::Rejection => {
            let density = |y: f64| kernel.conditioned_density_finite_n(x0, y, t, n);
            CdfTable::from_density(0.0, 1.0, CDF_CELLS, density)?.0
        }
    };
    Ok(table)
}

/// One-sample KS of `count` draws of `X_t` against the matching analytic marginal.
/// `n` is the conditioning horizon for the exact and rejection samplers.
pub fn check_montecarlo_marginals(
    kernel: &SpectralKernel,
    sampler: SamplerKind,
    count: usize,
    t: f64,
    n: f64,
    x0: f64,
    seed: u64,
) -> VerificationReport {
    let name = format!("montecarlo_{}", sampler.as_str());
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("sampler", sampler.as_str().into()),
        ("N", count.to_string()),
        ("t", t.to_string()),
        ("n", n.to_string()),
        ("x0", x0.to_string()),
        ("seed", seed.to_string()),
    ]);
    run_check(&name, p.clone(), || {
        let table = reference_cdf(kernel, sampler, t, n, x0)?;
        let vals: Vec<f64> = draw_marginals(kernel, sampler, count, &[0.0, t], n, x0, seed, 20_000_000)?
            .into_iter()
            .map(|v| v[1])
            .collect();
        ks_report(&name, p, &vals, &table)
    })
}

/// Joint law of `(X_{t1}, X_{t2})` from the exact sampler against the kernel:
/// Pearson χ² over an 8 × 8 grid of cells, with sparse cells pooled.
pub fn check_two_time(kernel: &SpectralKernel, count: usize, t1: f64, t2: f64, n: f64, x0: f64, seed: u64) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("N", count.to_string()),
        ("t1", t1.to_string()),
        ("t2", t2.to_string()),
        ("n", n.to_string()),
        ("x0", x0.to_string()),
        ("seed", seed.to_string()),
        ("bins", "8x8".into()),
    ]);
    run_check("two_time", p.clone(), || {
        let bins = 8;
        let edges: Vec<f64> = (0..=bins).map(|b| b as f64 / bins as f64).collect();
        let paths = sample_conditioned_exact_batch(x0, &[0.0, t1, t2], n, kernel, seed, count)?;
        let mut observed = vec![0.0; bins * bins];
        for v in &paths {
            let b1 = histogram(&[v.values[1]], &edges).iter().position(|&c| c > 0.0);
            let b2 = histogram(&[v.values[2]], &edges).iter().position(|&c| c > 0.0);
            if let (Some(b1), Some(b2)) = (b1, b2) {
                observed[b1 * bins + b2] += 1.0;
            }
        }
        let expected = joint_bin_masses(kernel, x0, t1, t2 - t1, n, &edges)?;
        let (obs, exp) = pool(&observed, &expected, count as f64);
        let chi = chi_squared(&obs, &exp)?;
        let crit = chi_squared_critical(chi.dof, SIGNIFICANCE)?;
        let r = VerificationReport::new("two_time", p, chi.statistic, crit)
            .with_note(format!("chi2 p-value {:.4}, {} cells", chi.p_value, obs.len()));
        Ok(underpowered(r, count))
    })
}

/// `P(X_{t1} ∈ bin a, X_{t1+dt} ∈ bin b)` on a square grid of bins.
fn joint_bin_masses(kernel: &SpectralKernel, x0: f64, t1: f64, dt: f64, n: f64, edges: &[f64]) -> Result<Vec<f64>> {
    let (gx, gw) = gauss_legendre(16);
    let panels = 4;
    let bins = edges.len() - 1;
    // outer nodes over the first coordinate
    let mut nodes = Vec::new();
    for (b, w) in edges.windows(2).enumerate() {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let left = w[0] + p as f64 * h;
            for (z, wt) in gx.iter().zip(&gw) {
                nodes.push((b, left + 0.5 * h * (z + 1.0), 0.5 * h * wt));
            }
        }
    }
    let rows = nodes
        .par_iter()
        .map(|&(b, x, w)| {
            let first = kernel.conditioned_density_finite_n(x0, x, t1, n)?;
            let second: Vec<f64> = if n.is_infinite() {
                kernel.limit_bin_masses(x, dt, edges)?
            } else {
                let mut masses = vec![0.0; bins];
                for (m, e) in masses.iter_mut().zip(edges.windows(2)) {
                    let h = (e[1] - e[0]) / panels as f64;
                    for p in 0..panels {
                        let left = e[0] + p as f64 * h;
                        for (z, wt) in gx.iter().zip(&gw) {
                            let y = left + 0.5 * h * (z + 1.0);
                            *m += 0.5 * h * wt * kernel.conditioned_density_finite_n(x, y, dt, n - t1)?;
                        }
                    }
                }
                masses
            };
            Ok((b, w * first, second))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut joint = vec![0.0; bins * bins];
    for (b, wf, second) in rows {
        for (c, m) in second.iter().enumerate() {
            joint[b * bins + c] += wf * m;
        }
    }
    Ok(joint)
}

/// Merges every cell with fewer than `MIN_EXPECTED` expected counts into one pooled cell.
fn pool(observed: &[f64], expected: &[f64], total: f64) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut po, mut pe) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(expected) {
        if e * total >= MIN_EXPECTED {
            obs.push(*o);
            exp.push(*e);
        } else {
            po += o;
            pe += e;
        }
    }
    if pe > 0.0 {
        obs.push(po);
        exp.push(pe);
    }
    (obs, exp)
}

/// One long limit-diffusion path, read at unit times, binned against the stationary law.
pub fn check_ergodic(kernel: &SpectralKernel, horizon: f64, bins: usize, seed: u64) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("horizon", horizon.to_string()),
        ("bins", bins.to_string()),
        ("thinning", "1".into()),
        ("seed", seed.to_string()),
    ]);
    run_check("ergodic", p.clone(), || {
        let steps = horizon.floor() as usize;
        if steps < 2 * bins {
            return Err(Error::Verification("horizon too short for the bin count".into()));
        }
        let grid: Vec<f64> = (0..=steps).map(|i| i as f64).collect();
        let path = sample_limit_sde(0.5, &grid, kernel, &SdeConfig::default(), RngSpec::new(seed, 0))?;
        let samples = &path.values[1..];
        let edges: Vec<f64> = (0..=bins).map(|b| b as f64 / bins as f64).collect();
        let observed = histogram(samples, &edges);
        let (gx, gw) = gauss_legendre(16);
        let expected: Vec<f64> = edges
            .windows(2)
            .map(|e| {
                let h = e[1] - e[0];
                gx.iter()
                    .zip(&gw)
                    .map(|(z, w)| 0.5 * h * w * kernel.stationary_density(e[0] + 0.5 * h * (z + 1.0)))
                    .sum()
            })
            .collect();
        let (obs, exp) = pool(&observed, &expected, samples.len() as f64);
        let chi = chi_squared(&obs, &exp)?;
        let crit = chi_squared_critical(chi.dof, SIGNIFICANCE)?;
        let r = VerificationReport::new("ergodic", p, chi.statistic, crit)
            .with_note(format!("chi2 p-value {:.4}, {} samples", chi.p_value, samples.len()));
        Ok(underpowered(r, samples.len()))
    })
}

/// Acceptance frequency of the rejection sampler against `P^{x0}(τ > n)`, in standard errors.
pub fn check_acceptance_rate(kernel: &SpectralKernel, x0: f64, n: f64, attempts: u64, seed: u64) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("x0", x0.to_string()),
        ("n", n.to_string()),
        ("attempts", attempts.to_string()),
        ("seed", seed.to_string()),
    ]);
    run_check("acceptance_rate", p.clone(), || {
        let s = kernel.survival(x0, n)?;
        let est = rejection_acceptance_rate(x0, n, kernel.params(), &SdeConfig::default(), seed, attempts)?;
        let se = est.std_error(s);
        let z = (est.rate - s).abs() / se;
        Ok(VerificationReport::new("acceptance_rate", p, z, 3.0).with_note(format!(
            "rate {} ({} of {}), survival {s}, standard error {se:e}",
            est.rate, est.accepted, est.attempts
        )))
    })
}

/// Two-sample KS between exact and rejection draws of `X_t` under horizon `n`.
pub fn check_cross_sampler(
    kernel: &SpectralKernel,
    count: usize,
    t: f64,
    n: f64,
    x0: f64,
    seed: u64,
    max_attempts: u64,
) -> VerificationReport {
    let p = params(&[
        ("d", kernel.params().d().to_string()),
        ("N", count.to_string()),
        ("t", t.to_string()),
        ("n", n.to_string()),
        ("x0", x0.to_string()),
        ("seed", seed.to_string()),
        ("max_attempts", max_attempts.to_string()),
    ]);
    run_check("cross_sampler", p.clone(), || {
        let grid = [0.0, t];
        let exact: Vec<f64> = draw_marginals(kernel, SamplerKind::Exact, count, &grid, n, x0, seed, 0)?
            .into_iter()
            .map(|v| v[1])
            .collect();
        let rejected: Vec<f64> =
            draw_marginals(kernel, SamplerKind::Rejection, count, &grid, n, x0, seed.wrapping_add(1), max_attempts)?
                .into_iter()
                .map(|v| v[1])
                .collect();
        let ks = ks_two_sample(&exact, &rejected)?;
        let r = VerificationReport::new("cross_sampler", p, ks.statistic, ks.critical(SIGNIFICANCE))
            .with_note(format!("KS p-value {:.4}", ks.p_value));
        Ok(underpowered(r, count))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_table_of_uniform() {
        let (t, mass) = CdfTable::from_density(0.0, 2.0, 10, |_| Ok(0.5)).unwrap();
        assert!((mass - 1.0).abs() < 1e-14);
        assert!((t.cdf(0.5) - 0.25).abs() < 1e-14);
        assert_eq!(t.cdf(-1.0), 0.0);
        assert_eq!(t.cdf(3.0), 1.0);
    }

    #[test]
    fn pooling_keeps_totals() {
        let (o, e) = pool(&[10.0, 1.0, 2.0, 30.0], &[0.2, 0.001, 0.002, 0.797], 50.0);
        assert_eq!(o, vec![10.0, 30.0, 3.0]);
        assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_samples_are_underpowered_not_failed() {
        let k = SpectralKernel::with_dimension(2.0).unwrap();
        let r = check_montecarlo_marginals(&k, SamplerKind::Exact, 100, 0.5, f64::INFINITY, 0.5, 1);
        assert!(r.passed);
        assert!(r.note.unwrap().contains("underpowered"));
    }

    #[test]
    fn joint_masses_sum_to_one() {
        let k = SpectralKernel::with_dimension(2.0).unwrap();
        let edges: Vec<f64> = (0..=4).map(|b| b as f64 / 4.0).collect();
        let j = joint_bin_masses(&k, 0.5, 0.5, 0.5, f64::INFINITY, &edges).unwrap();
        assert!((j.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let j = joint_bin_masses(&k, 0.5, 0.5, 0.5, 2.0, &edges).unwrap();
        assert!((j.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
