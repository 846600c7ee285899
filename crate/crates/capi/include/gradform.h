/* C interface to the gradform exact-calculus engine. */

#ifndef GRADFORM_H
#define GRADFORM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum gradform_status {
  /**
   * Success; for `gradform_verify`, the suite passed.
   */
  GRADFORM_STATUS_OK = 0,
  /**
   * The suite ran to completion and found failing identities.
   */
  GRADFORM_STATUS_SUITE_FAIL = 1,
  /**
   * Input text failed to parse.
   */
  GRADFORM_STATUS_PARSE = 2,
  /**
   * Input parsed but failed validation (bad matrix, unknown suite, ...).
   */
  GRADFORM_STATUS_INVALID = 3,
  /**
   * A required pointer argument was null.
   */
  GRADFORM_STATUS_NULL_ARGUMENT = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  GRADFORM_STATUS_UTF8 = 5,
  /**
   * Internal panic; the message goes to `gradform_last_error`.
   */
  GRADFORM_STATUS_PANIC = 6,
} gradform_status;

/**
 * Opaque product-bundle handle.
 */
typedef struct gradform_bundle gradform_bundle;

/**
 * Opaque connection handle.
 */
typedef struct gradform_connection gradform_connection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The last error message on this thread, or null. Borrowed; do not free.
 */
const char *gradform_last_error(void);

/**
 * Static version string; do not free.
 */
const char *gradform_version(void);

/**
 * Release a string returned by any report function.
 *
 * # Safety
 * `text` must be null or a pointer previously returned by this library.
 */
void gradform_string_free(char *text);

/**
 * Parse a JSON connection spec (`dim`, `coords`, `phi`) and validate it.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the handle until
 * `gradform_connection_free`.
 */
enum gradform_status gradform_connection_parse(const char *json, struct gradform_connection **out);

/**
 * # Safety
 * `conn` must be null or a handle from `gradform_connection_parse`,
 * not yet freed.
 */
void gradform_connection_free(struct gradform_connection *conn);

/**
 * Vertical rank of the connection, or -1 on a null handle.
 *
 * # Safety
 * `conn` must be null or a live handle.
 */
int gradform_connection_rank(const struct gradform_connection *conn);

/**
 * Chart dimension of the connection, or -1 on a null handle.
 *
 * # Safety
 * `conn` must be null or a live handle.
 */
int gradform_connection_dim(const struct gradform_connection *conn);

/**
 * Curvature report (same text as `gradform curvature`).
 *
 * # Safety
 * `conn` must be a live handle; `out` a valid pointer. Free `*out` with
 * `gradform_string_free`.
 */
enum gradform_status gradform_connection_report(const struct gradform_connection *conn, char **out);

/**
 * Bracket table report (same text as `gradform bracket`).
 *
 * # Safety
 * As for `gradform_connection_report`.
 */
enum gradform_status gradform_connection_brackets(const struct gradform_connection *conn,
                                                  char **out);

/**
 * Decomposition report for [d, h*] (same text as `gradform decompose`).
 *
 * # Safety
 * As for `gradform_connection_report`.
 */
enum gradform_status gradform_connection_decompose(const struct gradform_connection *conn,
                                                   char **out);

/**
 * Curvature of the connection in the canonical form grammar.
 *
 * # Safety
 * As for `gradform_connection_report`.
 */
enum gradform_status gradform_connection_curvature(const struct gradform_connection *conn,
                                                   char **out);

/**
 * Cocurvature of the connection in the canonical form grammar.
 *
 * # Safety
 * As for `gradform_connection_report`.
 */
enum gradform_status gradform_connection_cocurvature(const struct gradform_connection *conn,
                                                     char **out);

/**
 * Parse a JSON bundle spec (`base_coords`, `fiber_coords`, `gamma`).
 *
 * # Safety
 * As for `gradform_connection_parse`.
 */
enum gradform_status gradform_bundle_parse(const char *json, struct gradform_bundle **out);

/**
 * # Safety
 * `pb` must be null or a handle from `gradform_bundle_parse`, not yet freed.
 */
void gradform_bundle_free(struct gradform_bundle *pb);

/**
 * Lift report for a product bundle (same text as `gradform lift`).
 *
 * # Safety
 * `pb` must be a live handle; `out` a valid pointer. Free `*out` with
 * `gradform_string_free`.
 */
enum gradform_status gradform_bundle_lift_report(const struct gradform_bundle *pb, char **out);

/**
 * Run a registered identity suite and return the rendered report.
 * `dims` may be null when `dims_len` is 0, in which case dimension 3 is
 * used. Returns `Ok` for a passing suite, `SuiteFail` when identities
 * failed (the report still describes them).
 *
 * # Safety
 * `suite_id` must be a valid NUL-terminated string; `dims` must point to
 * `dims_len` readable entries when non-null; `out_report` must be valid.
 */
enum gradform_status gradform_verify(const char *suite_id,
                                     const size_t *dims,
                                     size_t dims_len,
                                     uint32_t trials,
                                     uint64_t seed,
                                     char **out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADFORM_H */
