#ifndef PERCWALK_H
#define PERCWALK_H

/* Generated by cbindgen from the percwalk-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Single-walker coin codes.
 */
typedef enum PwCoin {
  PW_COIN_UP = 0,
  PW_COIN_DOWN = 1,
  PW_COIN_PHI_PLUS = 2,
  PW_COIN_PHI_MINUS = 3,
} PwCoin;

/**
 * Two-walker input codes.
 */
typedef enum PwPairInput {
  PW_PAIR_INPUT_PHI_PLUS = 0,
  PW_PAIR_INPUT_PSI_MINUS = 1,
  PW_PAIR_INPUT_PSI_S = 2,
} PwPairInput;

/**
 * Observable codes.
 */
typedef enum PwQuantity {
  PW_QUANTITY_DISTANCE = 0,
  PW_QUANTITY_MEETING = 1,
  PW_QUANTITY_ORIGIN = 2,
  PW_QUANTITY_SPREAD = 3,
} PwQuantity;

/**
 * Percolation regime codes.
 */
typedef enum PwRegime {
  PW_REGIME_PERFECT = 0,
  PW_REGIME_STATIC = 1,
  PW_REGIME_DYNAMIC = 2,
} PwRegime;

/**
 * Status code of every fallible call.
 */
typedef enum PwStatus {
  PW_STATUS_OK = 0,
  PW_STATUS_NULL_POINTER = 1,
  PW_STATUS_INVALID_ARGUMENT = 2,
  PW_STATUS_BUFFER_TOO_SMALL = 3,
  PW_STATUS_INTERNAL_ERROR = 4,
} PwStatus;

/**
 * Opaque estimation report handle.
 */
typedef struct PwEstimation PwEstimation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *pw_version(void);

/**
 * Number of lattice positions a `steps`-step walk can reach: `2*steps + 1`.
 * Single-walker buffers need this many doubles, joint buffers its square.
 */
size_t pw_window_size(size_t steps);

/**
 * Average connected-segment length `p / (1 - p)`.
 * Fails with `PW_STATUS_INVALID_ARGUMENT` for p outside [0, 1).
 * # Safety
 * `out` must be null or point to a writable double.
 */
enum PwStatus pw_avg_segment_length(double p, double *out);

/**
 * Variance `P_E (1 - P_E) / n` of the n-run frequency estimator.
 * # Safety
 * `out` must be null or point to a writable double.
 */
enum PwStatus pw_estimator_variance(double p_e, uint64_t n, double *out);

/**
 * Lower bound on the number of runs needed to estimate p to precision
 * `epsilon` from an event with probability `p_e` and curve slope `dp_dp`.
 * Writes +infinity for a flat curve; `out_reliable` is 1 when the Gaussian
 * error propagation behind the bound applies.
 * # Safety
 * Out-pointers must be null or point to writable storage.
 */
enum PwStatus pw_n_min(double p_e,
                       double dp_dp,
                       double epsilon,
                       double *out_value,
                       uint8_t *out_reliable);

/**
 * Ensemble-averaged single-walker distribution over positions
 * `-steps ..= steps`. `out_probs` must hold `pw_window_size(steps)` doubles.
 * # Safety
 * `out_probs` must be null or point to `out_len` writable doubles.
 */
enum PwStatus pw_single_average(size_t steps,
                                uint32_t regime,
                                double p,
                                uint32_t coin,
                                size_t averages,
                                uint64_t seed,
                                double *out_probs,
                                size_t out_len);

/**
 * Ensemble-averaged two-walker joint distribution, row-major over
 * `(i + steps) * (2*steps + 1) + (j + steps)`. `out_probs` must hold
 * `pw_window_size(steps)^2` doubles.
 * # Safety
 * `out_probs` must be null or point to `out_len` writable doubles.
 */
enum PwStatus pw_joint_average(size_t steps,
                               uint32_t regime,
                               double p,
                               uint32_t input,
                               size_t averages,
                               uint64_t seed,
                               double *out_probs,
                               size_t out_len);

/**
 * Monte Carlo sweep of one observable over the caller's p values.
 * `out_means` and `out_stderrs` must each hold `count` doubles.
 * # Safety
 * `p_values` must point to `count` readable doubles; non-null out-buffers
 * must hold `count` writable doubles each.
 */
enum PwStatus pw_sweep(uint32_t quantity,
                       uint32_t input,
                       uint32_t regime,
                       size_t steps,
                       size_t averages,
                       uint64_t seed,
                       const double *p_values,
                       size_t count,
                       double *out_means,
                       double *out_stderrs);

/**
 * Runs the full estimation pipeline (boson, fermion, classical pairs at the
 * origin plus the single symmetric-coin walker) on an evenly spaced grid.
 * Returns null on invalid arguments or internal failure.
 */
struct PwEstimation *pw_estimation_run(size_t steps,
                                       uint32_t regime,
                                       size_t averages,
                                       uint64_t seed,
                                       double epsilon,
                                       size_t fit_degree,
                                       double grid_lo,
                                       double grid_hi,
                                       size_t grid_count);

/**
 * Frees a handle returned by `pw_estimation_run`. Null is ignored.
 *
 * # Safety
 * `handle` must be a pointer previously returned by `pw_estimation_run` that
 * has not been freed yet.
 */
void pw_estimation_free(struct PwEstimation *handle);

/**
 * # Safety
 * `handle` must be a live pointer from `pw_estimation_run`.
 */
size_t pw_estimation_strategy_count(const struct PwEstimation *handle);

/**
 * # Safety
 * `handle` must be a live pointer from `pw_estimation_run`.
 */
size_t pw_estimation_grid_count(const struct PwEstimation *handle);

/**
 * Writes the NUL-terminated label of one strategy.
 *
 * # Safety
 * `handle` must be a live pointer from `pw_estimation_run`; `buffer` must
 * point to `buffer_len` writable bytes.
 */
enum PwStatus pw_estimation_strategy_label(const struct PwEstimation *handle,
                                           size_t strategy,
                                           char *buffer,
                                           size_t buffer_len);

/**
 * Copies one strategy's simulated event probabilities and run-count bounds
 * at the grid points. Either output may be null to skip it; non-null buffers
 * must hold `pw_estimation_grid_count` doubles. Unbounded entries are
 * +infinity.
 *
 * # Safety
 * `handle` must be a live pointer from `pw_estimation_run`; non-null buffers
 * must be large enough.
 */
enum PwStatus pw_estimation_curves(const struct PwEstimation *handle,
                                   size_t strategy,
                                   double *out_event_probability,
                                   double *out_n_min,
                                   size_t out_len);

/**
 * Number of optimality windows in the report.
 *
 * # Safety
 * `handle` must be a live pointer from `pw_estimation_run`.
 */
size_t pw_estimation_window_count(const struct PwEstimation *handle);

/**
 * Reads one optimality window: the winning strategy index and the p range on
 * which it needs the fewest runs.
 *
 * # Safety
 * `handle` must be a live pointer from `pw_estimation_run`; out-pointers
 * must be writable.
 */
enum PwStatus pw_estimation_window(const struct PwEstimation *handle,
                                   size_t window,
                                   size_t *out_strategy,
                                   double *out_p_lo,
                                   double *out_p_hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERCWALK_H */
