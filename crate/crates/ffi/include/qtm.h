#ifndef QTM_H
#define QTM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QtmFlip {
  QTM_FLIP_NOMINAL = 0,
  QTM_FLIP_ENERGY_BALANCE = 1,
} QtmFlip;

typedef enum QtmStatus {
  QTM_STATUS_OK = 0,
  QTM_STATUS_NULL_POINTER = 1,
  QTM_STATUS_INVALID_ARGUMENT = 2,
  QTM_STATUS_UNSUPPORTED = 3,
  QTM_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  QTM_STATUS_INTERNAL = 5,
} QtmStatus;

typedef enum QtmThermModel {
  QTM_THERM_MODEL_INSTANT = 0,
  QTM_THERM_MODEL_SUB_UNIT = 1,
  QTM_THERM_MODEL_BOSONIC = 2,
} QtmThermModel;

/**
 * Opaque machine handle.
 */
typedef struct QtmMachine QtmMachine;

/**
 * Cycle settings; obtain defaults with [`qtm_cycle_params_default`].
 */
typedef struct QtmCycleParams {
  double beta;
  double dt;
  double tau_tilde;
  double tau_prime;
  enum QtmThermModel therm_model;
  /**
   * Sub-unit count for `SubUnit` and `Bosonic`.
   */
  uintptr_t n_beta;
  /**
   * Dimensionless equilibration time for `Bosonic`.
   */
  double tau_beta;
  enum QtmFlip flip;
} QtmCycleParams;

typedef struct QtmLedger {
  double energy_to_apparatus;
  double reset_cost;
  double heat_in;
  double net_work;
  double w_ideal;
  double w_ideal_net;
  double completion_probability;
  uintptr_t n_steps;
  double dt;
} QtmLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qtm_last_error_message(void);

/**
 * Creates the spin clock with `l = two_l / 2`.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer.
 */
enum QtmStatus qtm_machine_new_spin(uint32_t two_l, struct QtmMachine **out);

/**
 * Releases a machine; null is ignored.
 *
 * # Safety
 * `m` must come from [`qtm_machine_new_spin`] and not be used afterwards.
 */
void qtm_machine_free(struct QtmMachine *m);

/**
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum QtmStatus qtm_machine_dim(const struct QtmMachine *m, uintptr_t *out);

/**
 * Defaults: window `(π/2, π)`, instant thermalisation, default flip convention.
 */
struct QtmCycleParams qtm_cycle_params_default(double beta, double dt);

/**
 * Exact selective cycle average.
 *
 * # Safety
 * All pointers must be valid; `out` must be writable.
 */
enum QtmStatus qtm_selective_cycle(const struct QtmMachine *m,
                                   const struct QtmCycleParams *params,
                                   struct QtmLedger *out);

/**
 * Exact unselective cycle average.
 *
 * # Safety
 * All pointers must be valid; `out` must be writable.
 */
enum QtmStatus qtm_unselective_cycle(const struct QtmMachine *m,
                                     const struct QtmCycleParams *params,
                                     struct QtmLedger *out);

/**
 * Work of the continuously stabilised engine over `(tau_tilde, tau_prime)`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum QtmStatus qtm_zeno_work(const struct QtmMachine *m,
                             double beta,
                             double tau_tilde,
                             double tau_prime,
                             double *out);

/**
 * Writes `Γ(t, dt)` row-major into `buf` (`buf[(to-1)*d + (from-1)]`).
 * `len` is the capacity in doubles and must be at least `d*d`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum QtmStatus qtm_transition_matrix(const struct QtmMachine *m,
                                     double t,
                                     double dt,
                                     double *buf,
                                     uintptr_t len);

/**
 * Input mixedness at which the classical-limit net work changes sign.
 */
double qtm_breakeven_mixedness(void);

/**
 * Fixed point of the output mixedness when outputs are recycled as inputs.
 *
 * # Safety
 * All pointers must be valid; `out` must be writable.
 */
enum QtmStatus qtm_stationary_mixedness(const struct QtmMachine *m,
                                        const struct QtmCycleParams *params,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTM_H */
