#ifndef HARDEDGE_H
#define HARDEDGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Density kinds, mirroring the CLI names.
typedef enum HeDensityKind {
  HE_DENSITY_KIND_KILLED = 0,
  HE_DENSITY_KIND_LIMIT = 1,
  HE_DENSITY_KIND_FREE = 2,
  HE_DENSITY_KIND_CONDITIONED = 3,
  HE_DENSITY_KIND_STATIONARY = 4,
} HeDensityKind;

// Outcome of a call.
typedef enum HeStatus {
  HE_STATUS_OK = 0,
  HE_STATUS_NULL_POINTER = 1,
  // Argument outside the mathematical domain.
  HE_STATUS_DOMAIN = 2,
  // Dimension outside `[2, 102]`.
  HE_STATUS_DIMENSION = 3,
  // Time below the smallest time the spectral series accept.
  HE_STATUS_SERIES_REGIME = 4,
  // Series or zero computation did not converge.
  HE_STATUS_NUMERICAL = 5,
  // A sampler gave up.
  HE_STATUS_SAMPLER = 6,
  HE_STATUS_INVALID_ARGUMENT = 7,
  // A Rust panic was caught at the boundary.
  HE_STATUS_PANIC = 8,
} HeStatus;

// Opaque kernel handle.
typedef struct HeKernel HeKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a kernel for dimension `d` with default settings.
//
// # Safety
// `out` must be valid for writing one pointer.
enum HeStatus he_kernel_new(double d, struct HeKernel **out);

// Builds a kernel with a custom truncation tolerance and smallest time; zero
// selects the default for either.
//
// # Safety
// `out` must be valid for writing one pointer.
enum HeStatus he_kernel_new_with(double d, double tail_tol, double t_min, struct HeKernel **out);

// Releases a kernel; null is ignored.
//
// # Safety
// `kernel` must come from [`he_kernel_new`] and not be used afterwards.
void he_kernel_free(struct HeKernel *kernel);

// The `i`-th positive zero (1-based) held by the kernel.
//
// # Safety
// `kernel` must be live and `out` valid for writing.
enum HeStatus he_kernel_zero(const struct HeKernel *kernel, size_t i, double *out);

// One density value; `n` is read by the conditioned kind only (`INFINITY` gives the limit).
//
// # Safety
// `kernel` must be live and `out` valid for writing.
enum HeStatus he_density(const struct HeKernel *kernel,
                         enum HeDensityKind kind,
                         double x,
                         double y,
                         double t,
                         double n,
                         double *out);

// Probability of staying below one up to time `t` from `x`.
//
// # Safety
// `kernel` must be live and `out` valid for writing.
enum HeStatus he_survival(const struct HeKernel *kernel, double x, double t, double *out);

// Drift of the limit diffusion at interior `x`.
//
// # Safety
// `kernel` must be live and `out` valid for writing.
enum HeStatus he_limit_drift(const struct HeKernel *kernel, double x, double *out);

// Writes the first `count` zeros of `J_α`, `α = (d − 2)/2`, to `out`.
//
// # Safety
// `out` must be valid for writing `count` doubles.
enum HeStatus he_zeros(double d, size_t count, double *out);

// Writes `count` exact draws of `X_t` started at `x0`, conditioned on survival to
// `n` (`INFINITY` for the limit diffusion). Draw `i` uses stream `i` of `seed`.
//
// # Safety
// `kernel` must be live and `out` valid for writing `count` doubles.
enum HeStatus he_sample_exact(const struct HeKernel *kernel,
                              double x0,
                              double t,
                              double n,
                              uint64_t seed,
                              size_t count,
                              double *out);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`) and returns its full length, or 0 when there is none.
//
// # Safety
// `buf` must be valid for writing `len` bytes, or null with `len = 0`.
size_t he_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARDEDGE_H */
