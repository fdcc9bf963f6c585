/* C interface to the remote-state-preparation simulator. */

#ifndef RSPSIM_H
#define RSPSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum RspsimStatus {
  /**
   * The call succeeded and every out-pointer was written.
   */
  RSPSIM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RSPSIM_STATUS_NULL_POINTER = 1,
  /**
   * A scalar argument was outside its documented range.
   */
  RSPSIM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation rejected its input on numerical grounds.
   */
  RSPSIM_STATUS_NUMERICAL_FAILURE = 3,
} RspsimStatus;

/**
 * Opaque handle to a shared two-qubit state.
 */
typedef struct RspsimState RspsimState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rspsim_version(void);

/**
 * Creates the shared singlet state.
 *
 * # Safety
 * `out` must be a valid pointer. On `Ok` it receives a handle that must be
 * released with `rspsim_state_free`.
 */
enum RspsimStatus rspsim_state_singlet(struct RspsimState **out);

/**
 * Creates the singlet mixed with computational-basis noise of weights `p1`
 * and `p2`. Both weights must lie in [0, 1] with `p1 + p2 <= 1`.
 *
 * # Safety
 * `out` must be a valid pointer. On `Ok` it receives a handle that must be
 * released with `rspsim_state_free`.
 */
enum RspsimStatus rspsim_state_noisy_singlet(double p1, double p2, struct RspsimState **out);

/**
 * Releases a state handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle produced by this library that has not
 * been freed before.
 */
void rspsim_state_free(struct RspsimState *state);

/**
 * Protocol payoff of the shared state at target phase `phi`.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum RspsimStatus rspsim_payoff(const struct RspsimState *state, double phi, double *out);

/**
 * Payoff averaged over the full equator of target phases.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum RspsimStatus rspsim_payoff_average(const struct RspsimState *state, double *out);

/**
 * Witness gain of the prepared state over Bob's marginal at phase `phi`,
 * plus the flag telling whether the marginal witness was positive so the
 * gain reads as a genuine enhancement.
 *
 * # Safety
 * `state` must be a live handle; `out_value` and `out_valid` must be valid
 * pointers.
 */
enum RspsimStatus rspsim_enhancement(const struct RspsimState *state,
                                     double phi,
                                     double *out_value,
                                     bool *out_valid);

/**
 * One-sided criterion for the prepared state against Bob's marginal, read
 * out by the balanced-split verifier on population `q` (0 or 1). Sides that
 * are not established come back as NaN; `out_established` is true when
 * either side is.
 *
 * # Safety
 * `state` must be a live handle; `out_gt`, `out_lt`, and `out_established`
 * must be valid pointers.
 */
enum RspsimStatus rspsim_cqb_hadamard(const struct RspsimState *state,
                                      double phi,
                                      uint8_t q,
                                      double *out_gt,
                                      double *out_lt,
                                      bool *out_established);

/**
 * Geometric discord of the shared state.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum RspsimStatus rspsim_geometric_discord(const struct RspsimState *state, double *out);

/**
 * Fidelity of the conditionally prepared state with the target at `phi`.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum RspsimStatus rspsim_fidelity_conditional(const struct RspsimState *state,
                                              double phi,
                                              double *out);

/**
 * Fidelity of Bob's unconditioned marginal with the target at `phi`.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum RspsimStatus rspsim_fidelity_marginal(const struct RspsimState *state,
                                           double phi,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSPSIM_H */
