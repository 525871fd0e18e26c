/* C interface to the tubebeta verification library. */

#ifndef TUBEBETA_H
#define TUBEBETA_H

/* Generated by cbindgen from the tubebeta-ffi crate — do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Binary-power variant id: the closed form's second factor with exponent
 * offset `+n`.
 */
#define TB_VARIANT_PLUS_N 1

/**
 * Binary-power variant id: the adjudicated exponent offset `0`.
 */
#define TB_VARIANT_ZERO 0

/**
 * Binary-power variant id: exponent offset `-n`.
 */
#define TB_VARIANT_MINUS_N -1

/**
 * Reduction stage id: the cone slice `v2 -> r` substitution.
 */
#define TB_STEP_R_SUBSTITUTION 0

/**
 * Reduction stage id: the whitening change `(x, y) -> (p, q)`.
 */
#define TB_STEP_WHITENING 1

/**
 * Reduction stage id: the imaginary shift `w2 -> h`.
 */
#define TB_STEP_H_SHIFT 2

/**
 * Result code of every API call.
 */
typedef enum TbStatus {
  /**
   * Success; all non-optional outputs were written.
   */
  TB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TB_STATUS_NULL_ARGUMENT = 1,
  /**
   * Parameters are malformed (n = 0, non-finite entries, unknown variant
   * or step id) or violate the convergence conditions.
   */
  TB_STATUS_INVALID_PARAMS = 2,
  /**
   * A gamma-function argument hit a pole.
   */
  TB_STATUS_GAMMA_POLE = 3,
  /**
   * A power base crossed the principal-branch guard (Re <= 0) or was 0.
   */
  TB_STATUS_BRANCH_GUARD = 4,
  /**
   * A point left the tube domain.
   */
  TB_STATUS_OUTSIDE_DOMAIN = 5,
  /**
   * An integral diverges for these parameters.
   */
  TB_STATUS_CONVERGENCE = 6,
  /**
   * Quadrature could not reach the requested tolerance.
   */
  TB_STATUS_QUAD_TOLERANCE = 7,
  /**
   * Sampler or run configuration is unusable (budget < 2, workers = 0 or
   * > 4096, bad proposal knobs).
   */
  TB_STATUS_BAD_CONFIG = 8,
  /**
   * An internal invariant failed (a panic was caught at the boundary).
   */
  TB_STATUS_INTERNAL = 9,
} TbStatus;

/**
 * Prepared Monte-Carlo run: validated parameters plus sampling
 * configuration. Opaque; create with [`tb_sampler_new`], destroy with
 * [`tb_sampler_free`].
 */
typedef struct TbSampler TbSampler;

/**
 * A complex number; layout-compatible with `double _Complex` and with
 * `struct { double re, im; }`.
 */
typedef struct TbComplex {
  double re;
  double im;
} TbComplex;

/**
 * The six exponents and the rank of the identity.
 */
typedef struct TbParams {
  /**
   * Rank `n >= 1`; the domain lives in `C^(n+1)`.
   */
  uint32_t n;
  struct TbComplex lambda1;
  struct TbComplex lambda2;
  struct TbComplex sigma1;
  struct TbComplex sigma2;
  struct TbComplex tau1;
  struct TbComplex tau2;
} TbParams;

/**
 * Monte-Carlo estimate of the integral side.
 */
typedef struct TbEstimate {
  /**
   * Estimated value of the integral.
   */
  struct TbComplex mean;
  /**
   * Standard error of the modulus of the estimate.
   */
  double std_error;
  /**
   * Samples actually accumulated.
   */
  uint64_t n_samples;
  /**
   * Samples discarded as non-finite (should be 0).
   */
  uint64_t nonfinite_samples;
  /**
   * max |sample| / mean |sample|; a tail-health diagnostic.
   */
  double weight_ratio;
  /**
   * True when `weight_ratio` exceeds the library's flagging threshold.
   */
  bool flagged;
} TbEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated name of a status code. Never null.
 */
const char *tb_status_name(enum TbStatus status);

/**
 * Checks the four convergence conditions of the identity.
 *
 * Returns `TB_STATUS_OK` when all four hold strictly, otherwise
 * `TB_STATUS_INVALID_PARAMS`. When `out_margins` is non-null it receives
 * the four signed margins (positive = holds) in the order: Re(lambda1)
 * bound, first-block budget, Re(lambda2) bound, second-block budget —
 * written in both outcomes.
 *
 * # Safety
 * `params` must be null or point to a readable `TbParams`; `out_margins`
 * must be null or point to writable space for 4 doubles.
 */
enum TbStatus tb_validate(const struct TbParams *params, double *out_margins);

/**
 * Closed form of the auxiliary 2D integral.
 *
 * # Safety
 * `out` must be null (the call then only reports the status) or point to a
 * writable `TbComplex`.
 */
enum TbStatus tb_aux_closed_form(struct TbComplex alpha,
                                 struct TbComplex beta,
                                 struct TbComplex gamma,
                                 struct TbComplex *out);

/**
 * First gamma factor of the closed form.
 *
 * # Safety
 * `params` must be null or readable; `out` must be null or writable.
 */
enum TbStatus tb_factor_i(const struct TbParams *params, struct TbComplex *out);

/**
 * Second gamma factor of the closed form at a binary-power variant
 * (`TB_VARIANT_*`).
 *
 * # Safety
 * `params` must be null or readable; `out` must be null or writable.
 */
enum TbStatus tb_factor_j(const struct TbParams *params, int32_t variant, struct TbComplex *out);

/**
 * Full closed form (product of both factors) at a binary-power variant.
 * Fails with `TB_STATUS_INVALID_PARAMS` when the convergence conditions do
 * not hold.
 *
 * # Safety
 * `params` must be null or readable; `out` must be null or writable.
 */
enum TbStatus tb_rhs(const struct TbParams *params, int32_t variant, struct TbComplex *out);

/**
 * Deterministic quadrature of the auxiliary 2D integral to relative
 * tolerance `tol`. `out_error_estimate` and `out_evaluations` are optional.
 *
 * # Safety
 * `out_value` must be null or writable, likewise both optional outputs.
 */
enum TbStatus tb_quad_aux(struct TbComplex alpha,
                          struct TbComplex beta,
                          struct TbComplex gamma,
                          double tol,
                          struct TbComplex *out_value,
                          double *out_error_estimate,
                          uint64_t *out_evaluations);

/**
 * Deterministic quadrature of the reduced second-factor integral to
 * relative tolerance `tol`. `out_error_estimate` and `out_evaluations` are
 * optional.
 *
 * # Safety
 * `params` must be null or readable; outputs must be null or writable.
 */
enum TbStatus tb_quad_j_reduced(const struct TbParams *params,
                                double tol,
                                struct TbComplex *out_value,
                                double *out_error_estimate,
                                uint64_t *out_evaluations);

/**
 * Checks one reduction stage (`TB_STEP_*`) pointwise on `samples` draws.
 * `unit_jacobian_fault` replaces the whitening volume factor by 1 — a
 * negative control that must make the whitening stage fail for `n >= 2`.
 * Writes whether the stage held through `out_pass` (required) and the
 * worst relative error through optional `out_max_rel_err`.
 *
 * # Safety
 * `params` must be null or readable; `out_pass` must be writable;
 * `out_max_rel_err` must be null or writable.
 */
enum TbStatus tb_verify_step(const struct TbParams *params,
                             int32_t step,
                             uint64_t samples,
                             uint64_t seed,
                             bool unit_jacobian_fault,
                             double *out_max_rel_err,
                             bool *out_pass);

/**
 * Creates a Monte-Carlo run handle for the integral side. Validates the
 * convergence conditions eagerly. `workers = 0` selects the library
 * default (8); otherwise `1..=4096`. The handle must be released with
 * [`tb_sampler_free`].
 *
 * # Safety
 * `params` must be null or readable; `out` must point to a writable
 * pointer slot. On success `*out` owns the handle.
 */
enum TbStatus tb_sampler_new(const struct TbParams *params,
                             uint64_t budget,
                             uint64_t seed,
                             uint32_t workers,
                             struct TbSampler **out);

/**
 * Runs the Monte-Carlo estimate configured in `sampler`. The handle stays
 * valid and can be run again (the estimate is deterministic per
 * (seed, budget, workers), so reruns reproduce the same numbers).
 *
 * # Safety
 * `sampler` must be a live handle from [`tb_sampler_new`] (or null);
 * `out` must be null or writable.
 */
enum TbStatus tb_sampler_run(const struct TbSampler *sampler, struct TbEstimate *out);

/**
 * Releases a handle from [`tb_sampler_new`]. Null is a no-op.
 *
 * # Safety
 * `sampler` must be null or a handle not freed before; the handle must not
 * be used afterwards.
 */
void tb_sampler_free(struct TbSampler *sampler);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUBEBETA_H */
