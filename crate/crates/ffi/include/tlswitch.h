#ifndef TLSWITCH_H
#define TLSWITCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bound kind selector for [`tls_analysis_lb`].
 */
typedef enum TlsBoundKind {
  TLS_BOUND_KIND_CLOSED = 0,
  TLS_BOUND_KIND_RECURSIVE = 1,
} TlsBoundKind;

/**
 * Result codes.
 */
typedef enum TlsStatus {
  TLS_STATUS_OK = 0,
  TLS_STATUS_NULL_POINTER = 1,
  TLS_STATUS_INVALID_UTF8 = 2,
  TLS_STATUS_PARSE = 3,
  TLS_STATUS_TRANSLATE = 4,
  TLS_STATUS_MODEL = 5,
  TLS_STATUS_BOUND = 6,
  TLS_STATUS_TRAIN = 7,
  TLS_STATUS_INVALID_ARGUMENT = 8,
  TLS_STATUS_JSON = 9,
  TLS_STATUS_UNAVAILABLE = 10,
  TLS_STATUS_PANIC = 99,
} TlsStatus;

/**
 * Product of a model and an automaton with its bound tables.
 */
typedef struct TlsAnalysis TlsAnalysis;

/**
 * Task automaton.
 */
typedef struct TlsFsa TlsFsa;

/**
 * Grid world description.
 */
typedef struct TlsModel TlsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tls_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *tls_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed; null is ignored.
 */
void tls_string_free(char *s);

/**
 * Parses and translates a formula. `time_bound` may be null.
 *
 * # Safety
 * `formula` must be a NUL-terminated string; `out` must be writable.
 */
enum TlsStatus tls_fsa_from_formula(const char *formula, struct TlsFsa **out, uint64_t *time_bound);

/**
 * Number of automaton states, or 0 for null.
 *
 * # Safety
 * `fsa` must be a live handle or null.
 */
size_t tls_fsa_num_states(const struct TlsFsa *fsa);

/**
 * Serialises the automaton as JSON into a new string.
 *
 * # Safety
 * `fsa` must be a live handle; `out` must be writable.
 */
enum TlsStatus tls_fsa_to_json(const struct TlsFsa *fsa, char **out);

/**
 * # Safety
 * `fsa` must come from [`tls_fsa_from_formula`] and not have been freed.
 */
void tls_fsa_free(struct TlsFsa *fsa);

/**
 * Loads a grid world from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TlsStatus tls_model_from_json(const char *json, struct TlsModel **out);

/**
 * # Safety
 * `model` must come from [`tls_model_from_json`] and not have been freed.
 */
void tls_model_free(struct TlsModel *model);

/**
 * Builds the product and both bound tables up to `horizon` steps (0 means
 * the formula's time bound). A negative `epsilon` keeps the model's own.
 *
 * # Safety
 * `model` and `fsa` must be live handles; `out` must be writable.
 */
enum TlsStatus tls_analysis_new(const struct TlsModel *model,
                                const struct TlsFsa *fsa,
                                double epsilon,
                                uint64_t horizon,
                                struct TlsAnalysis **out);

/**
 * Number of product states, or 0 for null.
 *
 * # Safety
 * `analysis` must be a live handle or null.
 */
size_t tls_analysis_num_states(const struct TlsAnalysis *analysis);

/**
 * Product state of an episode starting in grid cell `(x, y)`.
 *
 * # Safety
 * `analysis` must be a live handle; `out` must be writable.
 */
enum TlsStatus tls_analysis_initial_state(const struct TlsAnalysis *analysis,
                                          int32_t x,
                                          int32_t y,
                                          size_t *out);

/**
 * Lower bound on reaching the accepting set from product state `p` within
 * `k` steps.
 *
 * # Safety
 * `analysis` must be a live handle; `out` must be writable.
 */
enum TlsStatus tls_analysis_lb(const struct TlsAnalysis *analysis,
                               enum TlsBoundKind kind,
                               size_t p,
                               uint64_t k,
                               double *out);

/**
 * # Safety
 * `analysis` must come from [`tls_analysis_new`] and not have been freed.
 */
void tls_analysis_free(struct TlsAnalysis *analysis);

/**
 * Closed-form bound for a walk `d` steps from the goal.
 *
 * # Safety
 * `out` must be writable.
 */
enum TlsStatus tls_closed_form_lb(uint64_t d,
                                  uint64_t k,
                                  double eps,
                                  uint64_t delta_max,
                                  double *out);

/**
 * Wilson score interval for `n_s` successes and `n_f` failures.
 *
 * # Safety
 * `low` and `up` must be writable.
 */
enum TlsStatus tls_wilson_bounds(uint64_t n_s, uint64_t n_f, double z, double *low, double *up);

/**
 * Trains on `model` with a JSON request
 * (`{"formula", "pr_des", "episodes", "seed", "runs", ...}`) and returns the
 * episode records and switching statistics as JSON.
 *
 * # Safety
 * `model` must be a live handle, `request` a NUL-terminated string and
 * `out` writable.
 */
enum TlsStatus tls_train_json(const struct TlsModel *model, const char *request, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TLSWITCH_H */
