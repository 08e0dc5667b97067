/* C interface to the reversible multiparty session toolkit. */

#pragma once

/* Generated by cbindgen from rms-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes, aligned with the `rms` binary's exit codes.
 */
typedef enum RmsStatus {
  /**
   * The operation succeeded.
   */
  RMS_STATUS_OK = 0,
  /**
   * The operation ran but the subject was rejected: an ill-formed
   * global, an undefined projection, a typing failure, a violated
   * property, or a script directive that is not enabled.
   */
  RMS_STATUS_REJECTED = 1,
  /**
   * The source or script text does not parse.
   */
  RMS_STATUS_PARSE_ERROR = 2,
  /**
   * Reserved for I/O failures; the library itself never does I/O.
   */
  RMS_STATUS_IO_ERROR = 3,
  /**
   * A null pointer, invalid UTF-8, or a name that does not exist.
   */
  RMS_STATUS_INVALID_ARGUMENT = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  RMS_STATUS_INTERNAL_ERROR = 5,
} RmsStatus;

/**
 * A parsed `.rms` source. Opaque; create with [`rms_parse`], release with
 * [`rms_source_free`].
 */
typedef struct RmsSource RmsSource;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message describing the most recent failure on this thread, or null.
 * The pointer is valid until the next failing call on the same thread; do
 * not free it.
 */
const char *rms_last_error(void);

/**
 * The library version as a static string; do not free it.
 */
const char *rms_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer previously returned in an output slot of
 * this library, not yet freed.
 */
void rms_string_free(char *s);

/**
 * Releases a source handle.
 *
 * # Safety
 * `src` must be null or a pointer from [`rms_parse`], not yet freed.
 */
void rms_source_free(struct RmsSource *src);

/**
 * Parses `.rms` source text into a handle stored in `*out`.
 *
 * On success `*out` owns the parsed source; on failure `*out` is null and
 * the parse error is available from [`rms_last_error`].
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid slot.
 */
enum RmsStatus rms_parse(const char *text, struct RmsSource **out);

/**
 * Checks every global type for well-formedness and every annotated
 * session against its global pair. When `out_json` is non-null it
 * receives the full report. Returns `OK` when everything is accepted and
 * `REJECTED` otherwise.
 *
 * # Safety
 * `src` must come from [`rms_parse`]; `out_json` may be null.
 */
enum RmsStatus rms_check(const struct RmsSource *src, char **out_json);

/**
 * Projects the named global type onto one participant, or onto all of its
 * participants when `participant` is null. `out_json` receives the rows.
 * Returns `REJECTED` when some requested projection is undefined.
 *
 * # Safety
 * `src` must come from [`rms_parse`]; `participant` and `out_json` may be
 * null.
 */
enum RmsStatus rms_project(const struct RmsSource *src,
                           const char *type_name,
                           const char *participant,
                           char **out_json);

/**
 * Pretty-prints the source back to canonical `.rms` text in `*out_text`.
 *
 * # Safety
 * `src` must come from [`rms_parse`]; `out_text` must be a valid slot.
 */
enum RmsStatus rms_format(const struct RmsSource *src, char **out_text);

/**
 * Runs bounded verification (subject reduction, session fidelity,
 * progress) on the named session, or on every annotated session when
 * `session_name` is null. `out_json` receives the per-session reports and
 * the overall verdict. Returns `REJECTED` when some property is violated;
 * an inconclusive (bound-exhausted) result is still `OK`.
 *
 * # Safety
 * `src` must come from [`rms_parse`]; `session_name` and `out_json` may
 * be null.
 */
enum RmsStatus rms_verify(const struct RmsSource *src,
                          const char *session_name,
                          uint32_t depth,
                          uint32_t state_cap,
                          char **out_json);

/**
 * Runs a scheduler script against the source's network and writes the
 * step trace plus final states to `*out_text`. `script` is the script
 * text (`#`-commented directive lines); when null, the source's embedded
 * `script { ... }` block is used. Returns `REJECTED` when a directive is
 * not enabled, with the offending directive in [`rms_last_error`].
 *
 * # Safety
 * `src` must come from [`rms_parse`]; `script` and `out_text` may be
 * null.
 */
enum RmsStatus rms_simulate_script(const struct RmsSource *src,
                                   const char *script,
                                   char **out_text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
