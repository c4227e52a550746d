#ifndef RELAXLS_H
#define RELAXLS_H

/* Generated by cbindgen from the relaxls-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Update weighting of the discrete estimators.
 */
#define RELAXLS_NORMALIZATION_UNIT 0

#define RELAXLS_NORMALIZATION_GAIN_WEIGHTED 1

typedef enum {
  RELAXLS_STATUS_OK = 0,
  RELAXLS_STATUS_NULL_POINTER = 1,
  RELAXLS_STATUS_DIMENSION = 2,
  RELAXLS_STATUS_INVALID_ARGUMENT = 3,
  RELAXLS_STATUS_NON_FINITE = 4,
  /**
   * Numerical failure while running: lost definiteness, blow-up, bad normalization.
   */
  RELAXLS_STATUS_NUMERICAL = 5,
  RELAXLS_STATUS_IO = 6,
  RELAXLS_STATUS_CONFIG = 7,
  RELAXLS_STATUS_PANIC = 99,
} RelaxlsStatus;

/**
 * Continuous-time estimator, integrated with fixed-step RK4.
 */
typedef struct RelaxlsCtEstimator RelaxlsCtEstimator;

/**
 * Discrete-time estimator with forgetting factor `beta`.
 */
typedef struct RelaxlsDtEstimator RelaxlsDtEstimator;

/**
 * Resetting estimator for plants whose parameters switch at known steps.
 */
typedef struct RelaxlsSwitchedEstimator RelaxlsSwitchedEstimator;

/**
 * Fills `phi_out` (length `p`) and `y_out` for time `t`. Returns 0 on
 * success; any other value aborts the step.
 */
typedef int (*RelaxlsSampler)(double t, double *phi_out, double *y_out, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *relaxls_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, or 0 if
 * there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t relaxls_last_error_message(char *buf, size_t len);

void relaxls_clear_error(void);

/**
 * Adjugate and determinant of the `n x n` matrix `a`.
 *
 * # Safety
 * `a` and `adj_out` must hold `n * n` doubles, `det_out` one.
 */
RelaxlsStatus relaxls_adjugate(const double *a, size_t n, double *adj_out, double *det_out);

/**
 * Mixing step: `delta = det(phi)`, `cal_y = adj(phi) y`.
 *
 * # Safety
 * `y` and `cal_y_out` must hold `p` doubles, `phi` `p * p`, `delta_out` one.
 */
RelaxlsStatus relaxls_mix(const double *y,
                          const double *phi,
                          size_t p,
                          double *cal_y_out,
                          double *delta_out);

/**
 * # Safety
 * `eta0` and `theta0` must hold `p` doubles; `out` must be writable.
 */
RelaxlsStatus relaxls_dt_new(size_t p,
                             const double *eta0,
                             const double *theta0,
                             double f0,
                             double beta,
                             double gamma,
                             int normalization_kind,
                             RelaxlsDtEstimator **out_handle);

/**
 * Processes one sample. On failure the estimator keeps its previous state.
 *
 * # Safety
 * `handle` must come from [`relaxls_dt_new`]; `phi` must hold `p` doubles.
 */
RelaxlsStatus relaxls_dt_step(RelaxlsDtEstimator *handle, const double *phi, double y);

/**
 * # Safety
 * `handle` must be valid; `theta_out` must hold `p` doubles.
 */
RelaxlsStatus relaxls_dt_theta(const RelaxlsDtEstimator *handle, double *theta_out);

/**
 * Current scalar regressor `delta`.
 *
 * # Safety
 * `handle` must be valid; `delta_out` writable.
 */
RelaxlsStatus relaxls_dt_delta(const RelaxlsDtEstimator *handle, double *delta_out);

/**
 * # Safety
 * `handle` must be null or come from [`relaxls_dt_new`], and not be used afterwards.
 */
void relaxls_dt_free(RelaxlsDtEstimator *handle);

/**
 * `instants` lists the reset steps in increasing order; `beta` is fixed to 1.
 *
 * # Safety
 * `eta0`, `theta0` must hold `p` doubles, `instants` `n_instants` values.
 */
RelaxlsStatus relaxls_switched_new(size_t p,
                                   const double *eta0,
                                   const double *theta0,
                                   double f0,
                                   double gamma,
                                   int normalization_kind,
                                   const uint64_t *instants,
                                   size_t n_instants,
                                   RelaxlsSwitchedEstimator **out_handle);

/**
 * # Safety
 * `handle` must be valid; `phi` must hold `p` doubles.
 */
RelaxlsStatus relaxls_switched_step(RelaxlsSwitchedEstimator *handle, const double *phi, double y);

/**
 * # Safety
 * `handle` must be valid; `theta_out` must hold `p` doubles.
 */
RelaxlsStatus relaxls_switched_theta(const RelaxlsSwitchedEstimator *handle, double *theta_out);

/**
 * # Safety
 * `handle` must be valid; `delta_out` writable.
 */
RelaxlsStatus relaxls_switched_delta(const RelaxlsSwitchedEstimator *handle, double *delta_out);

/**
 * # Safety
 * `handle` must be null or come from [`relaxls_switched_new`].
 */
void relaxls_switched_free(RelaxlsSwitchedEstimator *handle);

/**
 * `m_bound <= 0` selects the default bound `100 / f0`.
 *
 * # Safety
 * `eta0` and `theta0` must hold `p` doubles; `out_handle` writable.
 */
RelaxlsStatus relaxls_ct_new(size_t p,
                             const double *eta0,
                             const double *theta0,
                             double alpha,
                             double f0,
                             double beta0,
                             double m_bound,
                             double gamma,
                             RelaxlsCtEstimator **out_handle);

/**
 * Advances the estimator by `h`, calling `sampler` at `t`, `t + h/2` and
 * `t + h`. On failure the estimator keeps its previous state.
 *
 * # Safety
 * `handle` must be valid and `sampler` must honour its contract.
 */
RelaxlsStatus relaxls_ct_step(RelaxlsCtEstimator *handle,
                              double h,
                              RelaxlsSampler sampler,
                              void *user_data);

/**
 * # Safety
 * `handle` must be valid; `theta_out` must hold `p` doubles.
 */
RelaxlsStatus relaxls_ct_theta(const RelaxlsCtEstimator *handle, double *theta_out);

/**
 * # Safety
 * `handle` must be valid; `delta_out` writable.
 */
RelaxlsStatus relaxls_ct_delta(const RelaxlsCtEstimator *handle, double *delta_out);

/**
 * # Safety
 * `handle` must be valid; `t_out` writable.
 */
RelaxlsStatus relaxls_ct_time(const RelaxlsCtEstimator *handle, double *t_out);

/**
 * # Safety
 * `handle` must be null or come from [`relaxls_ct_new`].
 */
void relaxls_ct_free(RelaxlsCtEstimator *handle);

/**
 * Runs a scenario described by a JSON configuration and stores a JSON
 * document `[{"estimator", "failure", "records"}]` in `*json_out`, to be
 * released with [`relaxls_string_free`].
 *
 * # Safety
 * `config` must be a NUL-terminated string; `json_out` writable.
 */
RelaxlsStatus relaxls_run_scenario_json(const char *config, char **json_out);

/**
 * # Safety
 * `s` must be null or come from this library.
 */
void relaxls_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELAXLS_H */
