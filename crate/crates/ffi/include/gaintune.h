#ifndef GAINTUNE_H
#define GAINTUNE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum GtStatus {
  GT_STATUS_OK = 0,
  GT_STATUS_NULL_POINTER = 1,
  GT_STATUS_INVALID_ARGUMENT = 2,
  GT_STATUS_OUT_OF_DOMAIN = 3,
  GT_STATUS_NOT_POSITIVE_DEFINITE = 4,
  /**
   * Index past the end of a lap log.
   */
  GT_STATUS_OUT_OF_RANGE = 5,
  GT_STATUS_PANIC = 6,
  GT_STATUS_INTERNAL = 7,
} GtStatus;

typedef enum GtTermination {
  GT_TERMINATION_COMPLETED = 0,
  GT_TERMINATION_DIVERGED = 1,
  GT_TERMINATION_TIMEOUT = 2,
} GtTermination;

/**
 * A Gaussian process fitted to a dataset on the unit cube.
 */
typedef struct GtGp GtGp;

/**
 * A simulated lap.
 */
typedef struct GtLap GtLap;

typedef struct GtGains {
  double lambda_v;
  double lambda_a;
  double k1;
  double k2;
} GtGains;

/**
 * Lap settings exposed over the ABI. Everything else uses library defaults.
 */
typedef struct GtLapOptions {
  double straight_length;
  double corner_radius;
  bool clockwise;
  /**
   * Disables actuator and measurement noise.
   */
  bool noiseless;
  uint64_t seed;
} GtLapOptions;

typedef struct GtLapSummary {
  bool completed;
  enum GtTermination termination;
  double l_comp;
  double l_lap;
  double completion_ratio;
  /**
   * NaN unless the lap diverged.
   */
  double diverged_at;
  size_t samples;
  size_t guard_steps;
  size_t saturated_steps;
} GtLapSummary;

typedef struct GtCost {
  double j_lat;
  double j_head;
  double j;
  double j_bo;
  double penalty;
  double completion_ratio;
} GtCost;

/**
 * One logged sample. Angles in radians.
 */
typedef struct GtSample {
  double t;
  double x;
  double y;
  double phi;
  double x_t;
  double y_t;
  double phi_t;
  double v_cmd;
  double omega_cmd;
  double rho;
  double alpha;
  double beta;
  double e_lat;
  double e_head;
} GtSample;

typedef struct GtTrackingError {
  double rho;
  double alpha;
  double beta;
} GtTrackingError;

typedef struct GtCommand {
  double v;
  double omega;
  bool v_saturated;
  bool omega_saturated;
  bool guarded;
} GtCommand;

typedef struct GtHyper {
  double signal_variance;
  double length_scales[4];
  double noise_variance;
} GtHyper;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on the calling thread, or null if
 * none. Valid until the next failing call on this thread.
 */
const char *gt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gt_version(void);

struct GtGains gt_baseline_gains(void);

/**
 * Default stadium track with noise enabled and seed 0.
 */
struct GtLapOptions gt_lap_options_default(void);

/**
 * Simulates one lap. On success `*out` owns a handle to free with
 * [`gt_lap_free`]; on failure it is set to null.
 *
 * # Safety
 * Pointers must be null or valid for the access implied by their type.
 */
enum GtStatus gt_run_lap(const struct GtGains *gains,
                         const struct GtLapOptions *options,
                         struct GtLap **out);

/**
 * # Safety
 * `lap` must be null or a handle from [`gt_run_lap`] not yet freed.
 */
void gt_lap_free(struct GtLap *lap);

/**
 * # Safety
 * `lap` must be a live handle and `out` writable, or null.
 */
enum GtStatus gt_lap_summary(const struct GtLap *lap, struct GtLapSummary *out);

/**
 * Cost of the lap under the default weights.
 *
 * # Safety
 * `lap` must be a live handle and `out` writable, or null.
 */
enum GtStatus gt_lap_cost(const struct GtLap *lap, struct GtCost *out);

/**
 * Copies logged sample `index`; the count is in [`GtLapSummary::samples`].
 *
 * # Safety
 * `lap` must be a live handle and `out` writable, or null.
 */
enum GtStatus gt_lap_sample(const struct GtLap *lap, size_t index, struct GtSample *out);

/**
 * Saturated control command for a tracking error and a target moving at
 * `v_t` with heading rate `phi_dot_t`.
 *
 * # Safety
 * Pointers must be null or valid for the access implied by their type.
 */
enum GtStatus gt_control(const struct GtTrackingError *err,
                         double v_t,
                         double phi_dot_t,
                         const struct GtGains *gains,
                         double v_max,
                         double omega_max,
                         struct GtCommand *out);

/**
 * Fits a GP to `n` points. `inputs` holds `4 * n` row-major coordinates in
 * the unit cube and `observations` holds `n` values. With `hyper` null the
 * hyperparameters are fitted by maximum marginal likelihood.
 *
 * # Safety
 * `inputs` and `observations` must point to `4 * n` and `n` readable
 * doubles; other pointers must be null or valid.
 */
enum GtStatus gt_gp_fit(const double *inputs,
                        const double *observations,
                        size_t n,
                        const struct GtHyper *hyper,
                        struct GtGp **out);

/**
 * # Safety
 * `gp` must be null or a handle from [`gt_gp_fit`] not yet freed.
 */
void gt_gp_free(struct GtGp *gp);

/**
 * Posterior mean and variance of the latent function at `z` (4 doubles).
 *
 * # Safety
 * `z` must point to 4 readable doubles; other pointers null or valid.
 */
enum GtStatus gt_gp_predict(const struct GtGp *gp, const double *z, double *mean, double *variance);

/**
 * # Safety
 * `gp` must be a live handle and `out` writable, or null.
 */
enum GtStatus gt_gp_hyper(const struct GtGp *gp, struct GtHyper *out);

/**
 * Expected improvement below `j_min` for a Gaussian prediction. Returns NaN
 * for non-finite inputs or negative variance.
 */
double gt_expected_improvement(double mean, double variance, double j_min);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAINTUNE_H */
