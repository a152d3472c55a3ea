//! Command-line front end: `zeros`, `density`, `sample` and `verify`.
//!
//! Settings come from three layers, later ones winning: built-in defaults, a
//! flat `key = value` config file given by `--config`, and command-line flags.
//! Config keys are the long flag names with `-` or `_`.

use crate::csvfmt::fmt17;
use crate::error::{Error, Result};
use crate::kernels::{DensityKind, KernelConfig, SpectralKernel};
use crate::samplers::{
    marginals_to_csv, sample_bessel_batch, sample_conditioned_exact_batch, sample_conditioned_rejection_batch,
    sample_limit_batch, uniform_grid, PathSample, RejectionConfig, SamplerKind, SdeConfig,
};
use crate::specfun::{BesselParams, ZeroTable};
use crate::verify::{reports_to_json, run_suite, Suite, VerifyConfig};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "hardedge", version, about = "Bessel processes conditioned to stay below one")]
pub struct Cli {
    /// Dimension d of the Bessel process (2 <= d <= 102).
    #[arg(long, global = true)]
    pub d: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Truncation tolerance of the spectral series.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certified zeros of J_α, α = (d − 2)/2, as CSV.
    Zeros(ZerosArgs),
    /// A density tabulated on a grid of end points, as CSV.
    Density(DensityArgs),
    /// Sampled paths or marginals, as CSV plus a JSON sidecar.
    Sample(SampleArgs),
    /// Runs verification checks and prints a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// killed, limit, free, conditioned or stationary.
    #[arg(long)]
    pub kind: Option<String>,
    /// Start point.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Conditioning horizon of the `conditioned` kind.
    #[arg(long)]
    pub n: Option<f64>,
    /// Number of end points.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub quad_points: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub zero_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// bessel, exact, rejection or limit.
    #[arg(long)]
    pub sampler: Option<String>,
    #[arg(long)]
    pub x0: Option<f64>,
    /// Final time of the grid.
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of equal grid steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Conditioning horizon (`inf` for the limit) of the exact and rejection samplers.
    #[arg(long)]
    pub n: Option<f64>,
    /// `path` writes one path; `marginal` writes the final values of many.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<u64>,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// full, d3-oracle, none or a single check name.
    #[arg(long)]
    pub suite: Option<String>,
    /// Record measured runtimes (makes the report run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Sample count of the Monte Carlo checks.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

/// The effective settings of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub d: f64,
    pub seed: u64,
    pub out: Option<String>,
    pub tol: f64,
    pub max_terms: usize,
    pub quad_points: usize,
    pub t_min: f64,
    pub zero_tol: f64,
    pub count: usize,
    pub kind: String,
    pub x: f64,
    pub t: f64,
    pub n: f64,
    pub points: usize,
    pub sampler: String,
    pub x0: f64,
    pub steps: usize,
    pub mode: String,
    pub samples: usize,
    pub max_step: f64,
    pub max_attempts: u64,
    pub suite: String,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let k = KernelConfig::default();
        RunConfig {
            d: 2.0,
            seed: 20240601,
            out: None,
            tol: k.tail_tol,
            max_terms: k.max_terms,
            quad_points: k.quad_points,
            t_min: k.t_min,
            zero_tol: k.zero_tol,
            count: 10,
            kind: "limit".into(),
            x: 0.5,
            t: 1.0,
            n: 4.0,
            points: 101,
            sampler: "exact".into(),
            x0: 0.5,
            steps: 10,
            mode: "marginal".into(),
            samples: 100_000,
            max_step: SdeConfig::default().max_step,
            max_attempts: RejectionConfig::default().max_attempts,
            suite: "full".into(),
            timings: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Config {
        field: field.into(),
        message: format!("cannot parse `{value}`: {e}"),
    })
}

impl RunConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let v = value.trim();
        let k = key.as_str();
        match k {
            "d" => self.d = parse_value(k, v)?,
            "seed" => self.seed = parse_value(k, v)?,
            "out" => self.out = Some(v.to_string()),
            "tol" => self.tol = parse_value(k, v)?,
            "max_terms" => self.max_terms = parse_value(k, v)?,
            "quad_points" => self.quad_points = parse_value(k, v)?,
            "t_min" => self.t_min = parse_value(k, v)?,
            "zero_tol" => self.zero_tol = parse_value(k, v)?,
            "count" => self.count = parse_value(k, v)?,
            "kind" => self.kind = v.to_string(),
            "x" => self.x = parse_value(k, v)?,
            "t" => self.t = parse_value(k, v)?,
            "n" => self.n = parse_value(k, v)?,
            "points" => self.points = parse_value(k, v)?,
            "sampler" => self.sampler = v.to_string(),
            "x0" => self.x0 = parse_value(k, v)?,
            "steps" => self.steps = parse_value(k, v)?,
            "mode" => self.mode = v.to_string(),
            "samples" => self.samples = parse_value(k, v)?,
            "max_step" => self.max_step = parse_value(k, v)?,
            "max_attempts" => self.max_attempts = parse_value(k, v)?,
            "suite" => self.suite = v.to_string(),
            "timings" => self.timings = parse_value(k, v)?,
            _ => {
                return Err(Error::Config {
                    field: key.clone(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Applies a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn kernel_config(&self) -> KernelConfig {
        KernelConfig {
            tail_tol: self.tol,
            max_terms: self.max_terms,
            quad_points: self.quad_points,
            t_min: self.t_min,
            zero_tol: self.zero_tol,
        }
    }

    fn params(&self) -> Result<BesselParams> {
        BesselParams::new(self.d).map_err(|e| Error::Config {
            field: "d".into(),
            message: e.to_string(),
        })
    }

    fn kernel(&self) -> Result<SpectralKernel> {
        let cfg = self.kernel_config();
        cfg.validate()?;
        SpectralKernel::new(self.params()?, cfg)
    }
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Layers defaults, the config file and flags into the effective [`RunConfig`].
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply_config_text(&text)?;
    }
    let mut flags: Vec<(&str, String)> = Vec::new();
    let mut push = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            flags.push((k, v));
        }
    };
    push("d", cli.d.map(|v| v.to_string()));
    push("seed", cli.seed.map(|v| v.to_string()));
    push("out", cli.out.as_ref().map(|p| p.display().to_string()));
    push("tol", cli.tol.map(|v| v.to_string()));
    let kernel_flags = |k: &KernelArgs, push: &mut dyn FnMut(&'static str, Option<String>)| {
        push("max_terms", k.max_terms.map(|v| v.to_string()));
        push("quad_points", k.quad_points.map(|v| v.to_string()));
        push("t_min", k.t_min.map(|v| v.to_string()));
        push("zero_tol", k.zero_tol.map(|v| v.to_string()));
    };
    match &cli.command {
        Command::Zeros(a) => push("count", a.count.map(|v| v.to_string())),
        Command::Density(a) => {
            push("kind", a.kind.clone());
            push("x", a.x.map(|v| v.to_string()));
            push("t", a.t.map(|v| v.to_string()));
            push("n", a.n.map(|v| v.to_string()));
            push("points", a.points.map(|v| v.to_string()));
            kernel_flags(&a.kernel, &mut push);
        }
        Command::Sample(a) => {
            push("sampler", a.sampler.clone());
            push("x0", a.x0.map(|v| v.to_string()));
            push("t", a.t.map(|v| v.to_string()));
            push("steps", a.steps.map(|v| v.to_string()));
            push("n", a.n.map(|v| v.to_string()));
            push("mode", a.mode.clone());
            push("samples", a.samples.map(|v| v.to_string()));
            push("max_step", a.max_step.map(|v| v.to_string()));
            push("max_attempts", a.max_attempts.map(|v| v.to_string()));
            kernel_flags(&a.kernel, &mut push);
        }
        Command::Verify(a) => {
            push("suite", a.suite.clone());
            push("timings", a.timings.then(|| "true".to_string()));
            push("samples", a.samples.map(|v| v.to_string()));
            kernel_flags(&a.kernel, &mut push);
        }
    }
    for (k, v) in flags {
        cfg.set(k, &v)?;
    }
    Ok(cfg)
}

fn write_output(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `zeros` command body: the certified table as CSV.
pub fn cmd_zeros(cfg: &RunConfig) -> Result<String> {
    let params = cfg.params()?;
    if cfg.count == 0 {
        return Err(config_err("count", "need at least one zero"));
    }
    let table = ZeroTable::compute(params.alpha(), cfg.count, cfg.zero_tol)?;
    table.certify()?;
    Ok(table.to_csv())
}

/// `density` command body: `x,y,t,value,kind` rows and a `# normalization,<mass>` footer.
pub fn cmd_density(cfg: &RunConfig) -> Result<String> {
    let kind: DensityKind = cfg.kind.parse()?;
    if cfg.points < 2 {
        return Err(config_err("points", "need at least two points"));
    }
    let kernel = cfg.kernel()?;
    let m = cfg.points;
    let ys: Vec<f64> = match kind {
        DensityKind::Limit | DensityKind::Stationary => (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
        DensityKind::Killed | DensityKind::Conditioned => (1..=m).map(|i| i as f64 / (m + 1) as f64).collect(),
        DensityKind::Free => {
            let upper = cfg.x + 8.0 * cfg.t.sqrt();
            (1..=m).map(|i| upper * i as f64 / m as f64).collect()
        }
    };
    let points: Vec<(f64, f64)> = ys.iter().map(|&y| (cfg.x, y)).collect();
    let values = kernel.evaluate_points(kind, &points, cfg.t, cfg.n)?;
    let mass = kernel.total_mass(kind, cfg.x, cfg.t, cfg.n)?;
    let mut out = String::from("x,y,t,value,kind\n");
    for ((x, y), v) in points.iter().zip(&values) {
        out.push_str(&format!("{},{},{},{},{}\n", fmt17(*x), fmt17(*y), fmt17(cfg.t), fmt17(*v), kind));
    }
    out.push_str(&format!("# normalization,{}\n", fmt17(mass)));
    Ok(out)
}

/// Sampler summary merged into the sidecar.
#[derive(Debug, Serialize)]
struct SampleSummary {
    paths: usize,
    attempts: u64,
    acceptance_rate: Option<f64>,
    warning: Option<String>,
}

/// `sample` command body: CSV and the JSON sidecar.
pub fn cmd_sample(cfg: &RunConfig) -> Result<(String, String)> {
    let sampler: SamplerKind = cfg.sampler.parse()?;
    let path_mode = match cfg.mode.as_str() {
        "path" => true,
        "marginal" => false,
        other => return Err(config_err("mode", format!("expected `path` or `marginal`, found `{other}`"))),
    };
    let count = if path_mode { 1 } else { cfg.samples };
    if count == 0 {
        return Err(config_err("samples", "need at least one sample"));
    }
    let grid = uniform_grid(cfg.t, cfg.steps)?;
    let sde = SdeConfig {
        max_step: cfg.max_step,
        ..Default::default()
    };
    let mut acceptance = None;
    let paths: Vec<PathSample> = match sampler {
        SamplerKind::Bessel => sample_bessel_batch(cfg.x0, &grid, &cfg.params()?, &sde, cfg.seed, count)?,
        SamplerKind::Limit => sample_limit_batch(cfg.x0, &grid, &cfg.kernel()?, &sde, cfg.seed, count)?,
        SamplerKind::Exact => sample_conditioned_exact_batch(cfg.x0, &grid, cfg.n, &cfg.kernel()?, cfg.seed, count)?,
        SamplerKind::Rejection => {
            let rc = RejectionConfig {
                sde,
                max_attempts: cfg.max_attempts,
            };
            let (paths, est) =
                sample_conditioned_rejection_batch(cfg.x0, &grid, cfg.n, &cfg.params()?, &rc, cfg.seed, count)?;
            acceptance = Some(est);
            paths
        }
    };
    let csv = if path_mode {
        paths[0].to_csv()
    } else {
        marginals_to_csv(&paths.iter().map(PathSample::last).collect::<Vec<_>>())
    };
    let summary = SampleSummary {
        paths: paths.len(),
        attempts: acceptance.map_or(paths.len() as u64, |a| a.attempts),
        acceptance_rate: acceptance.map(|a| a.rate),
        warning: paths[0].meta.warning.clone(),
    };
    let mut obj = match serde_json::to_value(cfg)? {
        serde_json::Value::Object(m) => m,
        _ => unreachable!("config serializes to an object"),
    };
    if let serde_json::Value::Object(m) = serde_json::to_value(&summary)? {
        obj.extend(m);
    }
    let sidecar = serde_json::to_string_pretty(&serde_json::Value::Object(obj))? + "\n";
    Ok((csv, sidecar))
}

/// `verify` command body: the JSON report and whether every check passed.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(String, bool)> {
    let suite: Suite = cfg.suite.parse()?;
    let reports = if suite == Suite::None {
        Vec::new()
    } else {
        let kernel = cfg.kernel()?;
        let vc = VerifyConfig {
            d: cfg.d,
            seed: cfg.seed,
            samples: cfg.samples.max(1),
            x0: cfg.x0,
            ..VerifyConfig::default()
        };
        run_suite(&suite, &vc, &kernel)
    };
    let ok = reports.iter().all(|r| r.passed);
    Ok((reports_to_json(&reports, cfg.timings)? + "\n", ok))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Parses `args` and runs the command, writing to `--out` or `stdout`.
/// Returns the process exit code: 0 on success, 1 if a verification check failed.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| config_err("arguments", e.to_string()))?;
    let cfg = resolve(&cli)?;
    match &cli.command {
        Command::Zeros(_) => write_output(&cfg, &cmd_zeros(&cfg)?, stdout)?,
        Command::Density(_) => write_output(&cfg, &cmd_density(&cfg)?, stdout)?,
        Command::Sample(_) => {
            let (csv, sidecar) = cmd_sample(&cfg)?;
            write_output(&cfg, &csv, stdout)?;
            if let Some(out) = &cfg.out {
                std::fs::write(sidecar_path(Path::new(out)), sidecar)?;
            }
        }
        Command::Verify(_) => {
            let (json, ok) = cmd_verify(&cfg)?;
            write_output(&cfg, &json, stdout)?;
            return Ok(if ok { 0 } else { 1 });
        }
    }
    Ok(0)
}
