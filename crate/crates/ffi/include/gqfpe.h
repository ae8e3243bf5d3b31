/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef GQFPE_H
#define GQFPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GqfpeStatus {
  GQFPE_STATUS_OK = 0,
  GQFPE_STATUS_INVALID_ARGUMENT = 1,
  GQFPE_STATUS_DOMAIN = 2,
  GQFPE_STATUS_NUMERICAL = 3,
  GQFPE_STATUS_UNSUPPORTED = 4,
  GQFPE_STATUS_NULL_POINTER = 5,
  GQFPE_STATUS_PANIC = 6,
} GqfpeStatus;

typedef struct GqfpePropagator GqfpePropagator;

// Coefficient samples on `t_s = i·t_max/steps`, `i = 0..=steps`.
typedef struct GqfpeTrack GqfpeTrack;

typedef struct GqfpeKernels {
  double ki0;
  double ki1;
  double ki2;
  double kr0;
  double kr1;
  double kr2;
  double ki1_tilde;
  double kr1_tilde;
} GqfpeKernels;

typedef struct GqfpeCoefficients {
  double t_s;
  double r_m;
  double gamma;
  double r_pq;
  double r_qq;
  double r_pp;
  double alpha;
  double d;
  double branch;
  bool weak_damping_ok;
} GqfpeCoefficients;

// Propagation setup. `quartic = 0` selects the harmonic potential. The
// initial state is the thermal state of the ground oscillator `omega_g` at
// `beta_s`.
typedef struct GqfpePropagatorParams {
  double gamma_s;
  double beta_s;
  double omega_e;
  double shift;
  double quartic;
  double omega_g;
  double q0;
  double cross_gamma_s;
  size_t n_basis;
  // Basis frequency; 0 means `omega_e`.
  double omega_ref;
  double dt;
  bool symmetrize;
} GqfpePropagatorParams;

typedef struct GqfpeObservables {
  double t_s;
  double trace;
  double q_mean;
  double p_mean;
  double q_var;
  double p_var;
  double qp_sym;
  double purity;
  // NaN unless requested.
  double min_eig;
  double energy;
} GqfpeObservables;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length including the NUL,
// or 0 when there is no error.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t gqfpe_last_error_message(char *buf, size_t len);

// Static version string.
const char *gqfpe_version(void);

// Ohmic-Drude spectral density `η_e(ω)`.
//
// # Safety
// `out` must be valid for writes.
enum GqfpeStatus gqfpe_eta_e(double gamma_s, double omega, double *out);

// All eight Ohmic-Drude kernels at `t_s` (closed form).
//
// # Safety
// `out` must be valid for writes.
enum GqfpeStatus gqfpe_kernels(double gamma_s, double beta_s, double t_s, struct GqfpeKernels *out);

// Coefficients at `t_s`; pass `INFINITY` for the steady limit.
//
// # Safety
// `out` must be valid for writes.
enum GqfpeStatus gqfpe_coefficient_at(double gamma_s,
                                      double beta_s,
                                      double t_s,
                                      struct GqfpeCoefficients *out);

// # Safety
// `out` must be valid for writes. The handle must be released with
// [`gqfpe_track_free`].
enum GqfpeStatus gqfpe_track_new(double gamma_s,
                                 double beta_s,
                                 double t_max,
                                 size_t steps,
                                 struct GqfpeTrack **out);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `track` must be null or a live handle.
size_t gqfpe_track_len(const struct GqfpeTrack *track);

// Sample `index`; `index == len` returns the steady-limit sample.
//
// # Safety
// `track` must be null or a live handle; `out` must be valid for writes.
enum GqfpeStatus gqfpe_track_get(const struct GqfpeTrack *track,
                                 size_t index,
                                 struct GqfpeCoefficients *out);

// # Safety
// `track` must be null or a handle not yet freed.
void gqfpe_track_free(struct GqfpeTrack *track);

// Fills `out` with the defaults.
//
// # Safety
// `out` must be valid for writes.
enum GqfpeStatus gqfpe_propagator_params_default(struct GqfpePropagatorParams *out);

// # Safety
// `params` must be readable and `out` valid for writes. The handle must be
// released with [`gqfpe_propagator_free`].
enum GqfpeStatus gqfpe_propagator_new(const struct GqfpePropagatorParams *params,
                                      struct GqfpePropagator **out);

// Advances `n_steps` RK4 steps. Stops at the first step that fails or leaves
// the state unstable; the handle then holds the last state reached.
//
// # Safety
// `prop` must be a live handle.
enum GqfpeStatus gqfpe_propagator_step(struct GqfpePropagator *prop, size_t n_steps);

// Current time, or NaN for a null handle.
//
// # Safety
// `prop` must be null or a live handle.
double gqfpe_propagator_time(const struct GqfpePropagator *prop);

// # Safety
// `prop` must be a live handle and `out` valid for writes.
enum GqfpeStatus gqfpe_propagator_observables(const struct GqfpePropagator *prop,
                                              bool with_min_eig,
                                              struct GqfpeObservables *out);

// # Safety
// `prop` must be null or a handle not yet freed.
void gqfpe_propagator_free(struct GqfpePropagator *prop);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GQFPE_H */
