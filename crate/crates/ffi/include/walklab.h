#ifndef WALKLAB_H
#define WALKLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_UTF8 = 2,
  WL_STATUS_PARSE = 3,
  WL_STATUS_INVALID_ARGUMENT = 4,
  WL_STATUS_SUPPORT_CAP = 5,
  WL_STATUS_PRECONDITION = 6,
  WL_STATUS_TOLERANCE_UNREACHABLE = 7,
  WL_STATUS_BUFFER_TOO_SMALL = 8,
  WL_STATUS_INTERNAL = 9,
} WlStatus;

/**
 * A parsed group.
 */
typedef struct WlGroup WlGroup;

/**
 * A finitely supported probability measure, exact or floating point.
 */
typedef struct WlMeasure WlMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call on this thread.
 */
const char *wl_last_error(void);

/**
 * Parses a group such as `Z^2`, `Dinf` or `wreath(C2, Dinf)`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` writable.
 */
enum WlStatus wl_group_parse(const char *text, struct WlGroup **out);

/**
 * # Safety
 * `group` must come from [`wl_group_parse`] and not be freed twice.
 */
void wl_group_free(struct WlGroup *group);

/**
 * Parses a measure literal (`measure { atom "g" w; … }`) or a family
 * reference on `group`. `exact != 0` selects rational weights.
 *
 * # Safety
 * `group` must be a live handle, `text` a valid string, `out` writable.
 */
enum WlStatus wl_measure_parse(const struct WlGroup *group,
                               const char *text,
                               int exact,
                               struct WlMeasure **out);

/**
 * # Safety
 * `measure` must come from [`wl_measure_parse`] and not be freed twice.
 */
void wl_measure_free(struct WlMeasure *measure);

/**
 * Number of atoms.
 *
 * # Safety
 * `measure` must be a live handle and `out` writable.
 */
enum WlStatus wl_measure_len(const struct WlMeasure *measure, size_t *out);

/**
 * Shannon entropy in nats.
 *
 * # Safety
 * `measure` must be a live handle and `out` writable.
 */
enum WlStatus wl_measure_entropy(const struct WlMeasure *measure, double *out);

/**
 * Writes `H(μ^{*n})` for `n = 0..=n_max` into `out[0..=n_max]`; `out_len`
 * must be at least `n_max + 1`. `cap == 0` uses the default support cap.
 * `invariants_hold` (optional) receives whether the ladder invariants hold.
 *
 * # Safety
 * `measure` must be live and `out` must point to `out_len` doubles.
 */
enum WlStatus wl_entropy_ladder(const struct WlMeasure *measure,
                                size_t n_max,
                                size_t cap,
                                double *out,
                                size_t out_len,
                                int *invariants_hold);

/**
 * Rigorous escape-probability interval `[lo, hi]` with width at most `tol`.
 * Supports walks on `Z`, `Z^2`, and translation-supported walks on `Dinf`
 * and `BS(1,-1)`.
 *
 * # Safety
 * `measure` must be live; `lo` and `hi` writable.
 */
enum WlStatus wl_exact_escape(const struct WlMeasure *measure,
                              double tol,
                              size_t max_terms,
                              double *lo,
                              double *hi);

/**
 * Whether `word` (e.g. `"[x1,x2]"`) is trivial in the free solvable group
 * `S(d, m)`; writes 1 or 0 to `out`.
 *
 * # Safety
 * `word` must be a valid string and `out` writable.
 */
enum WlStatus wl_magnus_is_identity(const char *word, size_t d, size_t m, int *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WALKLAB_H */
