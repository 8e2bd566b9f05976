#ifndef NORMFORGE_H
#define NORMFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NfStatus {
  NF_STATUS_OK = 0,
  NF_STATUS_NULL_POINTER = 1,
  NF_STATUS_INVALID_UTF8 = 2,
  NF_STATUS_PARSE = 3,
  NF_STATUS_DIMENSION_MISMATCH = 4,
  NF_STATUS_NOT_A_NORM = 5,
  NF_STATUS_INVALID_ARGUMENT = 6,
  NF_STATUS_UNDECIDED = 7,
  NF_STATUS_RESOURCE_GUARD = 8,
  NF_STATUS_FAILED = 9,
  NF_STATUS_PANIC = 10,
} NfStatus;

/**
 * Opaque unit ball of a polytope norm.
 */
typedef struct NfBall NfBall;

/**
 * Opaque normed space with an ordered basis.
 */
typedef struct NfSpace NfSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; valid until the next
 * call into the library on the same thread. Never null.
 */
const char *nf_last_error_message(void);

/**
 * Release a string returned by the library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void nf_string_free(char *s);

/**
 * Parse a ball `{"dim": d, "generators": [["p/q", ...], ...]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum NfStatus nf_ball_from_json(const char *json, struct NfBall **out);

/**
 * # Safety
 * `ball` must come from [`nf_ball_from_json`] and not have been freed.
 */
void nf_ball_free(struct NfBall *ball);

/**
 * # Safety
 * `ball` must be a live handle.
 */
uintptr_t nf_ball_dim(const struct NfBall *ball);

/**
 * Exact gauge of a vector, written as `"p/q"` to `out`.
 *
 * # Safety
 * `ball` must be a live handle, `vec_json` a nul-terminated string and
 * `out` writable.
 */
enum NfStatus nf_ball_gauge(const struct NfBall *ball, const char *vec_json, char **out);

/**
 * Exact membership test.
 *
 * # Safety
 * As [`nf_ball_gauge`]; `out` must be writable.
 */
enum NfStatus nf_ball_contains(const struct NfBall *ball, const char *vec_json, bool *out);

/**
 * Enclosure `[lo, hi]` of `ρ(r, s, t)` with width at most `eps`.
 *
 * # Safety
 * All string arguments must be nul-terminated; `lo` and `hi` writable.
 */
enum NfStatus nf_rho(const char *r,
                     const char *s,
                     const char *t,
                     const char *eps,
                     char **lo,
                     char **hi);

/**
 * Parse a space `{"dim": d, "norm": {...}, "tags": [...]}`.
 *
 * # Safety
 * `json` must be nul-terminated; `out` writable.
 */
enum NfStatus nf_space_from_json(const char *json, struct NfSpace **out);

/**
 * # Safety
 * `space` must come from [`nf_space_from_json`] and not have been freed.
 */
void nf_space_free(struct NfSpace *space);

/**
 * Norm of a vector as JSON: `{"exact": "p/q"}`, `{"sqrt": "p/q"}` or
 * `{"enclosure": {"lo": ..., "hi": ...}}`; enclosing nodes use width
 * `eps`.
 *
 * # Safety
 * `space` must be a live handle, strings nul-terminated, `out` writable.
 */
enum NfStatus nf_space_eval(const struct NfSpace *space,
                            const char *vec_json,
                            const char *eps,
                            char **out);

/**
 * Run a verification suite (or `"all"`) and return the JSON report.
 * `passed` receives whether every check passed.
 *
 * # Safety
 * `name` must be nul-terminated; `report` and `passed` writable.
 */
enum NfStatus nf_verify(const char *name,
                        uint64_t seed,
                        uintptr_t samples,
                        char **report,
                        bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NORMFORGE_H */
