use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unsupported Bessel order {alpha}: supported range is [0, {max}]")]
    UnsupportedOrder { alpha: f64, max: f64 },

    #[error("dimension d = {0} is not supported (need 2 <= d <= 102)")]
    Dimension(f64),

    #[error("overflow: {what} with argument {value} exceeds {limit}")]
    Overflow {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("series regime: t = {t} is below t_min = {t_min}; spectral series are not evaluated there")]
    SeriesRegime { t: f64, t_min: f64 },

    #[error("truncation cap: tail bound {tail:e} still above tolerance {tol:e} after {terms} terms")]
    TruncationCap { terms: usize, tail: f64, tol: f64 },

    #[error("zero #{index} of J_{alpha}: {reason}")]
    Bracket {
        index: usize,
        alpha: f64,
        reason: String,
    },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("zero table order {table} does not match process order {params}")]
    OrderMismatch { table: f64, params: f64 },

    #[error("density is not normalized: integral = {integral}")]
    NotNormalized { integral: f64 },

    #[error("invalid density table: {0}")]
    InvalidDensity(String),

    #[error("inverse CDF failed: {0}")]
    InverseCdf(String),

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("rejection sampler exhausted {attempts} attempts with {accepted} accepted (rate {rate:e})")]
    AttemptsExhausted {
        attempts: u64,
        accepted: u64,
        rate: f64,
    },

    #[error("step size fell below {min_step:e} at x = {x} (t = {t})")]
    StepUnderflow { min_step: f64, x: f64, t: f64 },

    #[error("verification input rejected: {0}")]
    Verification(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        reason,
    }
}
