#ifndef ONEBIT_H
#define ONEBIT_H

/* Generated by cbindgen from onebit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum {
  ONEBIT_STATUS_OK = 0,
  /**
   * A pointer argument was null or an argument was out of range.
   */
  ONEBIT_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input text failed to parse.
   */
  ONEBIT_STATUS_PARSE_ERROR = 2,
  /**
   * A domain object failed validation.
   */
  ONEBIT_STATUS_VALIDATION_ERROR = 3,
  /**
   * An enumeration or iteration budget was exceeded.
   */
  ONEBIT_STATUS_BUDGET_EXCEEDED = 4,
  /**
   * An iterative solver failed to converge.
   */
  ONEBIT_STATUS_SOLVER_FAILURE = 5,
  /**
   * A certificate re-check failed.
   */
  ONEBIT_STATUS_CERTIFICATE_MISMATCH = 6,
  /**
   * A panic was caught at the boundary.
   */
  ONEBIT_STATUS_INTERNAL = 7,
} OnebitStatus;

/**
 * Opaque channel handle.
 */
typedef struct OnebitChannel OnebitChannel;

/**
 * Opaque correlation handle.
 */
typedef struct OnebitCorrelation OnebitCorrelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *onebit_last_error_message(void);

/**
 * Parses a channel from its JSON document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. The returned handle must be released with
 * [`onebit_channel_free`].
 */
OnebitStatus onebit_channel_from_json(const char *json, OnebitChannel **out);

/**
 * Builds the 4x6 benchmark channel.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
OnebitStatus onebit_channel_prevedel(OnebitChannel **out);

/**
 * Builds the hashing channel on `m`-bit inputs (1 <= m <= 8).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
OnebitStatus onebit_channel_hashing(uint32_t m, OnebitChannel **out);

/**
 * Serializes a channel back to JSON. Free the result with
 * [`onebit_string_free`].
 *
 * # Safety
 * `ch` must be a live handle; `out` must be a valid pointer.
 */
OnebitStatus onebit_channel_to_json(const OnebitChannel *ch, char **out);

/**
 * # Safety
 * `ch` must be a handle returned by this library, not yet freed.
 */
void onebit_channel_free(OnebitChannel *ch);

/**
 * # Safety
 * `s` must originate from [`onebit_channel_to_json`] or a sibling.
 */
void onebit_string_free(char *s);

/**
 * Parses a correlation from its JSON document. `clamped`, when non-null,
 * receives the count of slightly-negative entries clamped to zero.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be valid.
 */
OnebitStatus onebit_correlation_from_json(const char *json,
                                          OnebitCorrelation **out,
                                          uintptr_t *clamped);

/**
 * Builds a Popescu-Rohrlich box (`j` in 1..=4; `positive` selects the sign).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
OnebitStatus onebit_correlation_pr_box(uintptr_t j, bool positive, OnebitCorrelation **out);

/**
 * Builds the CHSH-optimal quantum box.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
OnebitStatus onebit_correlation_tsirelson(OnebitCorrelation **out);

/**
 * Builds the parity-query device matched to the hashing channel.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
OnebitStatus onebit_correlation_device_e(uint32_t m, OnebitCorrelation **out);

/**
 * Serializes a correlation back to JSON. Free with [`onebit_string_free`].
 *
 * # Safety
 * `corr` must be a live handle; `out` must be a valid pointer.
 */
OnebitStatus onebit_correlation_to_json(const OnebitCorrelation *corr, char **out);

/**
 * # Safety
 * `corr` must be a handle returned by this library, not yet freed.
 */
void onebit_correlation_free(OnebitCorrelation *corr);

/**
 * Unassisted one-shot success probability.
 *
 * # Safety
 * `ch` must be a live handle; `value` must be a valid pointer.
 */
OnebitStatus onebit_succ(const OnebitChannel *ch, double *value);

/**
 * Non-signaling assisted success probability.
 *
 * # Safety
 * `ch` must be a live handle; `value` must be a valid pointer.
 */
OnebitStatus onebit_succ_ns(const OnebitChannel *ch, double *value);

/**
 * Two-dimensional entanglement-assisted success probability. `restarts`
 * is the per-assignment restart count (0 selects the default of 64).
 *
 * # Safety
 * `ch` must be a live handle; `value` must be a valid pointer.
 */
OnebitStatus onebit_succ_q2(const OnebitChannel *ch,
                            uint64_t seed,
                            uint32_t restarts,
                            double *value);

/**
 * Whether the correlation satisfies both non-signaling marginals.
 *
 * # Safety
 * `corr` must be a live handle; `result` must be a valid pointer.
 */
OnebitStatus onebit_is_nonsignaling(const OnebitCorrelation *corr, bool *result);

/**
 * The four CHSH functional values of a binary box.
 *
 * # Safety
 * `corr` must be a live binary-box handle; `values` must point to at
 * least 4 doubles.
 */
OnebitStatus onebit_chsh_values(const OnebitCorrelation *corr, double *values);

/**
 * Local fraction of a binary non-signaling box.
 *
 * # Safety
 * `corr` must be a live binary-box handle; `alpha` must be a valid pointer.
 */
OnebitStatus onebit_local_fraction(const OnebitCorrelation *corr, double *alpha);

/**
 * Optimal deterministic assisted success probability for a channel and a
 * non-signaling device.
 *
 * # Safety
 * `ch` and `corr` must be live handles; `value` must be a valid pointer.
 */
OnebitStatus onebit_optimal_assisted_succ(const OnebitChannel *ch,
                                          const OnebitCorrelation *corr,
                                          double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEBIT_H */
