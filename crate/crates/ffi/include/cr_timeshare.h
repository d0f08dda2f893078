#ifndef CR_TIMESHARE_H
#define CR_TIMESHARE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CRTS_STATUS_OK = 0,
  CRTS_STATUS_NULL_POINTER = 1,
  CRTS_STATUS_INVALID_PARAMETER = 2,
  CRTS_STATUS_DOMAIN = 3,
  CRTS_STATUS_EMPTY_INPUT = 4,
  /**
   * The scenario has not been run yet.
   */
  CRTS_STATUS_NOT_RUN = 5,
  CRTS_STATUS_PANIC = 6,
} CrtsStatus;

typedef enum {
  CRTS_CALIBRATION_MODE_OUT_OF_SAMPLE = 0,
  CRTS_CALIBRATION_MODE_IN_SAMPLE = 1,
} CrtsCalibrationMode;

typedef enum {
  CRTS_POLICY_OPTIMAL = 0,
  CRTS_POLICY_FIXED = 1,
  CRTS_POLICY_UNCONSTRAINED = 2,
} CrtsPolicy;

typedef enum {
  CRTS_PHASE_TRAINING = 0,
  CRTS_PHASE_EVALUATION = 1,
} CrtsPhase;

/**
 * Opaque scenario handle.
 */
typedef struct CrtsScenario CrtsScenario;

/**
 * Scenario parameters in linear SI units (watts, power gains).
 */
typedef struct {
  double pt;
  double noise;
  double gamma_th;
  double epsilon;
  double mu_x;
  double mu_y;
  double mu_g;
  double mu_z;
  size_t m_slots;
  size_t m_train;
  uint64_t seed;
} CrtsParams;

typedef struct {
  double avg_rate;
  double p_he;
  double outage_fraction;
  size_t m_slots;
} CrtsRunMetrics;

typedef struct {
  double lambda;
  double train_outage_fraction;
  bool binding;
} CrtsCalibration;

typedef struct {
  double x;
  double y;
  double g;
  double z;
} CrtsChannelDraw;

typedef struct {
  double alpha;
  bool outage;
  double rate;
  double tx_power;
} CrtsSlotDecision;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if the last call
 * succeeded. The pointer stays valid until the next call on this thread.
 */
const char *crts_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *crts_version(void);

CrtsParams crts_params_default(void);

/**
 * Validates `params` and allocates a scenario. Draws are generated lazily.
 *
 * # Safety
 * `params` must point to a valid `CrtsParams`; `out` must be writable.
 */
CrtsStatus crts_scenario_new(const CrtsParams *params, CrtsScenario **out);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `scenario` must come from `crts_scenario_new` and not be used afterwards.
 */
void crts_scenario_free(CrtsScenario *scenario);

/**
 * Calibrates the penalty and runs the optimal, fixed (alpha = 0.5) and
 * unconstrained policies. Replaces the results of any earlier run.
 *
 * # Safety
 * `scenario` must be a live handle not used concurrently from another thread.
 */
CrtsStatus crts_scenario_run(CrtsScenario *scenario, CrtsCalibrationMode mode);

/**
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
CrtsStatus crts_scenario_metrics(const CrtsScenario *scenario,
                                 CrtsPolicy policy,
                                 CrtsRunMetrics *out);

/**
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
CrtsStatus crts_scenario_calibration(const CrtsScenario *scenario, CrtsCalibration *out);

/**
 * Fading draw of slot `index` in the given phase. Any index is valid; the
 * draws used by a run are indices below `m_train` or `m_slots`.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
CrtsStatus crts_scenario_draw(const CrtsScenario *scenario,
                              CrtsPhase phase,
                              uint64_t index,
                              CrtsChannelDraw *out);

/**
 * Root `z0 > 1` of `z ln z - z - s + 1 = 0` for `s > 0`.
 *
 * # Safety
 * `out` must be writable.
 */
CrtsStatus crts_solve_z0(double s, double *out);

/**
 * Achievable rate of transmitting for fraction `alpha` of the slot.
 *
 * # Safety
 * `out` must be writable.
 */
CrtsStatus crts_rate(double alpha, double s, double *out);

/**
 * Rate-maximizing transmit fraction; 1 when `s` is not positive.
 */
double crts_alpha_unconstrained(double s);

/**
 * Smallest transmit fraction that keeps interference within `gamma_th`.
 */
double crts_alpha_boundary(double g, double z, double pt, double gamma_th);

/**
 * # Safety
 * `draw` and `params` must be valid; `out` must be writable.
 */
CrtsStatus crts_snr_factor(const CrtsChannelDraw *draw, const CrtsParams *params, double *out);

/**
 * Per-slot decision of the penalized rule.
 *
 * # Safety
 * `draw` and `params` must be valid; `out` must be writable.
 */
CrtsStatus crts_choose_alpha(const CrtsChannelDraw *draw,
                             const CrtsParams *params,
                             double lambda,
                             CrtsSlotDecision *out);

/**
 * Calibrates the outage penalty on `count` caller-supplied training draws.
 *
 * # Safety
 * `draws` must point to `count` valid draws; `params` must be valid; `out`
 * must be writable.
 */
CrtsStatus crts_calibrate_lambda(const CrtsChannelDraw *draws,
                                 size_t count,
                                 const CrtsParams *params,
                                 CrtsCalibration *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CR_TIMESHARE_H */
