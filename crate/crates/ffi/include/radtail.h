/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef RADTAIL_H
#define RADTAIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RadtailStatus {
  RADTAIL_STATUS_OK = 0,
  RADTAIL_STATUS_NULL_POINTER = 1,
  RADTAIL_STATUS_INVALID_ARGUMENT = 2,
  RADTAIL_STATUS_CONFIG = 3,
  RADTAIL_STATUS_BLOWUP = 4,
  RADTAIL_STATUS_QUADRATURE = 5,
  RADTAIL_STATUS_UNSUPPORTED = 6,
  RADTAIL_STATUS_INSUFFICIENT_DATA = 7,
  RADTAIL_STATUS_IO = 8,
  RADTAIL_STATUS_PANIC = 9,
} RadtailStatus;

// Outcome of a tail verification.
typedef enum RadtailVerdict {
  RADTAIL_VERDICT_PASS = 0,
  RADTAIL_VERDICT_FAIL = 1,
  RADTAIL_VERDICT_INCONCLUSIVE = 2,
} RadtailVerdict;

// A parsed run configuration.
typedef struct RadtailConfig RadtailConfig;

// Sampled series of one evolution.
typedef struct RadtailRun RadtailRun;

// Closed-form tail `coefficient / t^gamma`.
typedef struct RadtailPrediction {
  double gamma;
  // NaN when the coefficient is not known in closed form.
  double coefficient;
  uint32_t order_in_small_param;
  bool anomalous;
} RadtailPrediction;

// Fit of an evolved series against its prediction.
typedef struct RadtailVerification {
  enum RadtailVerdict verdict;
  struct RadtailPrediction prediction;
  // NaN when no plateau formed.
  double fitted_gamma;
  // NaN when not fitted.
  double fitted_amplitude;
  // Suggested `t_final` when inconclusive, otherwise NaN.
  double recommended_t_final;
} RadtailVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *radtail_last_error(void);

// Library version as a static NUL-terminated string.
const char *radtail_version(void);

// Parses a TOML run configuration.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum RadtailStatus radtail_config_parse(const char *toml, struct RadtailConfig **out);

// # Safety
// `cfg` must be null or a pointer from [`radtail_config_parse`] not yet freed.
void radtail_config_free(struct RadtailConfig *cfg);

// Writes the fully resolved configuration as TOML into `buf` (NUL
// terminated). `*len` receives the required size including the NUL; when
// `cap` is too small nothing is written and `RADTAIL_STATUS_INVALID_ARGUMENT`
// is returned.
//
// # Safety
// `cfg` must be valid, `len` non-null, and `buf` writable for `cap` bytes
// (it may be null when `cap` is 0).
enum RadtailStatus radtail_config_resolved(const struct RadtailConfig *cfg,
                                           char *buf,
                                           size_t cap,
                                           size_t *len);

// Closed-form leading tail of the configured model.
//
// # Safety
// `cfg` and `out` must be valid pointers.
enum RadtailStatus radtail_predict(const struct RadtailConfig *cfg, struct RadtailPrediction *out);

// Evolves the configured model.
//
// # Safety
// `cfg` and `out` must be valid pointers.
enum RadtailStatus radtail_evolve(const struct RadtailConfig *cfg, struct RadtailRun **out);

// # Safety
// `run` must be null or a pointer from [`radtail_evolve`] not yet freed.
void radtail_run_free(struct RadtailRun *run);

// Number of series (one per observation radius).
//
// # Safety
// `run` must be valid or null.
size_t radtail_run_series_count(const struct RadtailRun *run);

// Radius and sample count of series `index`.
//
// # Safety
// `run`, `r_obs` and `len` must be valid pointers.
enum RadtailStatus radtail_run_series_info(const struct RadtailRun *run,
                                           size_t index,
                                           double *r_obs,
                                           size_t *len);

// Copies series `index` into `t` and `phi`, each with room for `cap`
// values.
//
// # Safety
// `run` must be valid; `t` and `phi` writable for `cap` doubles.
enum RadtailStatus radtail_run_series_copy(const struct RadtailRun *run,
                                           size_t index,
                                           double *t,
                                           double *phi,
                                           size_t cap);

// Evolves, fits the tail at the analysed radius and compares it with the
// prediction, as `radtail verify` does, without writing files.
//
// # Safety
// `cfg` and `out` must be valid pointers.
enum RadtailStatus radtail_verify(const struct RadtailConfig *cfg, struct RadtailVerification *out);

// Perturbative iterate selected by `[perturb] iterate` at the `n` points
// `(t[i], r[i])`, written to `out`. The configured `[perturb] points` are
// ignored.
//
// # Safety
// `cfg` must be valid; `t`, `r` readable and `out` writable for `n` doubles.
enum RadtailStatus radtail_perturb(const struct RadtailConfig *cfg,
                                   const double *t,
                                   const double *r,
                                   size_t n,
                                   double *out);

// Free wave generated by the bump `a(u) = amplitude (u-u0)^m (u1-u)^m`
// (normalized to peak 1 when `amplitude` is NaN) in `d = 2l+3`, evaluated
// in double-double precision at `(t, r)`, including `r = 0`.
//
// # Safety
// `out` must be a valid pointer.
enum RadtailStatus radtail_free_wave(uint32_t l,
                                     double u0,
                                     double u1,
                                     uint32_t m,
                                     double amplitude,
                                     double t,
                                     double r,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADTAIL_H */
