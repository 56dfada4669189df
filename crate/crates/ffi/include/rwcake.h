#ifndef RWCAKE_H
#define RWCAKE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the non-zero engine codes match the CLI exit codes.
 */
typedef enum RwcakeStatus {
  RWCAKE_STATUS_OK = 0,
  RWCAKE_STATUS_PARSE = 2,
  RWCAKE_STATUS_PRECONDITION = 3,
  RWCAKE_STATUS_MODEL_VIOLATION = 4,
  RWCAKE_STATUS_CERTIFICATION = 5,
  RWCAKE_STATUS_NULL_ARGUMENT = 6,
  RWCAKE_STATUS_PANIC = 7,
} RwcakeStatus;

/**
 * A list of player valuations.
 */
typedef struct RwcakeProfile RwcakeProfile;

/**
 * Output of a protocol run or duel as JSON plus headline numbers.
 */
typedef struct RwcakeResult RwcakeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Owned by the library.
 */
const char *rwcake_last_error(void);

/**
 * Parses a valuation profile (a JSON array of densities, or `{"players": [...]}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RwcakeStatus rwcake_profile_from_json(const char *json, struct RwcakeProfile **out);

/**
 * Random hungry profile with squared densities in (1/2, 2).
 *
 * # Safety
 * `out` must be writable.
 */
enum RwcakeStatus rwcake_profile_generate(size_t players,
                                          size_t segments,
                                          uint64_t seed,
                                          struct RwcakeProfile **out);

/**
 * Number of players, or 0 for a NULL handle.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
size_t rwcake_profile_players(const struct RwcakeProfile *profile);

/**
 * Serializes the profile; free the string with `rwcake_string_free`.
 *
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum RwcakeStatus rwcake_profile_to_json(const struct RwcakeProfile *profile, char **out);

/**
 * Player `player`'s (0-based) value of `[0, y]` as a `"p/q"` string.
 *
 * # Safety
 * `profile` must be a live handle, `y` a NUL-terminated string, `out` writable.
 */
enum RwcakeStatus rwcake_profile_eval(const struct RwcakeProfile *profile,
                                      size_t player,
                                      const char *y,
                                      char **out);

/**
 * # Safety
 * `profile` must be NULL or a handle not yet freed.
 */
void rwcake_profile_free(struct RwcakeProfile *profile);

/**
 * Runs a named protocol under `model` (`"rw"`, `"rw+"`, `"rw-"`; NULL means rw).
 *
 * # Safety
 * String arguments must be NUL-terminated (`model` may be NULL); `out` writable.
 */
enum RwcakeStatus rwcake_run_protocol(const struct RwcakeProfile *profile,
                                      const char *protocol,
                                      const char *eps,
                                      const char *model,
                                      struct RwcakeResult **out);

/**
 * Runs `protocol` (NULL picks the adversary's default) against an adversary
 * with a query cap, then finalizes, replays and certifies.
 *
 * # Safety
 * String arguments must be NUL-terminated (`protocol` may be NULL); `out` writable.
 */
enum RwcakeStatus rwcake_duel(const char *adversary,
                              const char *protocol,
                              size_t max_queries,
                              const char *eps,
                              struct RwcakeResult **out);

/**
 * Full JSON output. Owned by the result handle.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const char *rwcake_result_json(const struct RwcakeResult *result);

/**
 * The recomputed gap (protocol runs) or certified residual gap (duels), or NULL.
 *
 * # Safety
 * `result` must be NULL or a live handle.
 */
const char *rwcake_result_gap(const struct RwcakeResult *result);

/**
 * # Safety
 * `result` must be NULL or a live handle.
 */
size_t rwcake_result_queries(const struct RwcakeResult *result);

/**
 * # Safety
 * `result` must be NULL or a handle not yet freed.
 */
void rwcake_result_free(struct RwcakeResult *result);

/**
 * Frees a string returned through an output parameter.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void rwcake_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RWCAKE_H */
