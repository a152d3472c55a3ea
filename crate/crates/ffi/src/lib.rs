//! C ABI over the `hardedge` kernels and samplers.
//!
//! Every function returns a [`HeStatus`]; results are written through out
//! pointers. A failed call leaves a message retrievable with
//! [`he_last_error_message`] on the same thread. Kernels are opaque handles
//! created by [`he_kernel_new`] and released by [`he_kernel_free`].

use hardedge::kernels::DensityKind;
use hardedge::samplers::sample_conditioned_exact_batch;
use hardedge::{BesselParams, Error, KernelConfig, SpectralKernel, ZeroTable};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Outcome of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the mathematical domain.
    Domain = 2,
    /// Dimension outside `[2, 102]`.
    Dimension = 3,
    /// Time below the smallest time the spectral series accept.
    SeriesRegime = 4,
    /// Series or zero computation did not converge.
    Numerical = 5,
    /// A sampler gave up.
    Sampler = 6,
    InvalidArgument = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Density kinds, mirroring the CLI names.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeDensityKind {
    Killed = 0,
    Limit = 1,
    Free = 2,
    Conditioned = 3,
    Stationary = 4,
}

impl From<HeDensityKind> for DensityKind {
    fn from(k: HeDensityKind) -> Self {
        match k {
            HeDensityKind::Killed => DensityKind::Killed,
            HeDensityKind::Limit => DensityKind::Limit,
            HeDensityKind::Free => DensityKind::Free,
            HeDensityKind::Conditioned => DensityKind::Conditioned,
            HeDensityKind::Stationary => DensityKind::Stationary,
        }
    }
}

/// Opaque kernel handle.
pub struct HeKernel {
    inner: SpectralKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HeStatus {
    match err {
        Error::Domain { .. } | Error::IndexOutOfRange { .. } | Error::Grid(_) => HeStatus::Domain,
        Error::Dimension(_) | Error::UnsupportedOrder { .. } => HeStatus::Dimension,
        Error::SeriesRegime { .. } => HeStatus::SeriesRegime,
        Error::AttemptsExhausted { .. } | Error::StepUnderflow { .. } | Error::InverseCdf(_) => HeStatus::Sampler,
        Error::Config { .. } | Error::Parse { .. } | Error::OrderMismatch { .. } => HeStatus::InvalidArgument,
        _ => HeStatus::Numerical,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), HeStatus>) -> HeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside hardedge".into());
            HeStatus::Panic
        }
    }
}

fn lift<T>(r: hardedge::Result<T>) -> Result<T, HeStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T) -> Result<(), HeStatus> {
    if p.is_null() {
        set_error("null pointer argument".into());
        Err(HeStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Builds a kernel for dimension `d` with default settings.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn he_kernel_new(d: f64, out: *mut *mut HeKernel) -> HeStatus {
    he_kernel_new_with(d, 0.0, 0.0, out)
}

/// Builds a kernel with a custom truncation tolerance and smallest time; zero
/// selects the default for either.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn he_kernel_new_with(d: f64, tail_tol: f64, t_min: f64, out: *mut *mut HeKernel) -> HeStatus {
    guard(|| {
        non_null(out)?;
        let mut cfg = KernelConfig::default();
        if tail_tol != 0.0 {
            cfg.tail_tol = tail_tol;
        }
        if t_min != 0.0 {
            cfg.t_min = t_min;
        }
        let params = lift(BesselParams::new(d))?;
        let kernel = lift(SpectralKernel::new(params, cfg))?;
        *out = Box::into_raw(Box::new(HeKernel { inner: kernel }));
        Ok(())
    })
}

/// Releases a kernel; null is ignored.
///
/// # Safety
/// `kernel` must come from [`he_kernel_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn he_kernel_free(kernel: *mut HeKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// The `i`-th positive zero (1-based) held by the kernel.
///
/// # Safety
/// `kernel` must be live and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn he_kernel_zero(kernel: *const HeKernel, i: usize, out: *mut f64) -> HeStatus {
    guard(|| {
        non_null(kernel)?;
        non_null(out)?;
        *out = lift((*kernel).inner.table().zero(i))?;
        Ok(())
    })
}

/// One density value; `n` is read by the conditioned kind only (`INFINITY` gives the limit).
///
/// # Safety
/// `kernel` must be live and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn he_density(
    kernel: *const HeKernel,
    kind: HeDensityKind,
    x: f64,
    y: f64,
    t: f64,
    n: f64,
    out: *mut f64,
) -> HeStatus {
    guard(|| {
        non_null(kernel)?;
        non_null(out)?;
        *out = lift((*kernel).inner.evaluate(kind.into(), x, y, t, n))?;
        Ok(())
    })
}

/// Probability of staying below one up to time `t` from `x`.
///
/// # Safety
/// `kernel` must be live and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn he_survival(kernel: *const HeKernel, x: f64, t: f64, out: *mut f64) -> HeStatus {
    guard(|| {
        non_null(kernel)?;
        non_null(out)?;
        *out = lift((*kernel).inner.survival(x, t))?;
        Ok(())
    })
}

/// Drift of the limit diffusion at interior `x`.
///
/// # Safety
/// `kernel` must be live and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn he_limit_drift(kernel: *const HeKernel, x: f64, out: *mut f64) -> HeStatus {
    guard(|| {
        non_null(kernel)?;
        non_null(out)?;
        *out = lift((*kernel).inner.limit_drift(x))?;
        Ok(())
    })
}

/// Writes the first `count` zeros of `J_α`, `α = (d − 2)/2`, to `out`.
///
/// # Safety
/// `out` must be valid for writing `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn he_zeros(d: f64, count: usize, out: *mut f64) -> HeStatus {
    guard(|| {
        non_null(out)?;
        let params = lift(BesselParams::new(d))?;
        let table = lift(ZeroTable::compute(params.alpha(), count, KernelConfig::default().zero_tol))?;
        ptr::copy_nonoverlapping(table.zeros().as_ptr(), out, count);
        Ok(())
    })
}

/// Writes `count` exact draws of `X_t` started at `x0`, conditioned on survival to
/// `n` (`INFINITY` for the limit diffusion). Draw `i` uses stream `i` of `seed`.
///
/// # Safety
/// `kernel` must be live and `out` valid for writing `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn he_sample_exact(
    kernel: *const HeKernel,
    x0: f64,
    t: f64,
    n: f64,
    seed: u64,
    count: usize,
    out: *mut f64,
) -> HeStatus {
    guard(|| {
        non_null(kernel)?;
        non_null(out)?;
        let paths = lift(sample_conditioned_exact_batch(x0, &[0.0, t], n, &(*kernel).inner, seed, count))?;
        for (i, p) in paths.iter().enumerate() {
            *out.add(i) = p.last();
        }
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns its full length, or 0 when there is none.
///
/// # Safety
/// `buf` must be valid for writing `len` bytes, or null with `len = 0`.
#[no_mangle]
pub unsafe extern "C" fn he_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}
