#ifndef SPINC_H
#define SPINC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpincStatus {
  SPINC_STATUS_OK = 0,
  /**
   * A verification ran and at least one check failed.
   */
  SPINC_STATUS_CHECK_FAILED = 1,
  SPINC_STATUS_INVALID_INPUT = 2,
  SPINC_STATUS_NULL_POINTER = 3,
  /**
   * Unexpected internal failure (a caught panic).
   */
  SPINC_STATUS_INTERNAL = 4,
} SpincStatus;

/**
 * Multivector in a complexified Clifford algebra.
 */
typedef struct SpincMultivector SpincMultivector;

/**
 * Result of a scenario verification run.
 */
typedef struct SpincRunSummary SpincRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or NULL if none.
 * Release the result with [`spinc_string_free`].
 */
char *spinc_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void spinc_string_free(char *s);

/**
 * Zero multivector of `Cl(n+m)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SpincStatus spinc_multivector_new(size_t n, size_t m, struct SpincMultivector **out);

/**
 * # Safety
 * `mv` must be NULL or a handle from this library that has not been freed.
 */
void spinc_multivector_free(struct SpincMultivector *mv);

/**
 * Number of blades, `2^(n+m)`; 0 for a NULL handle.
 *
 * # Safety
 * `mv` must be NULL or a live handle.
 */
size_t spinc_multivector_blade_count(const struct SpincMultivector *mv);

/**
 * Sets the coefficient of the blade with bitmask `blade`.
 *
 * # Safety
 * `mv` must be a live handle.
 */
enum SpincStatus spinc_multivector_set(struct SpincMultivector *mv,
                                       size_t blade,
                                       double re,
                                       double im);

/**
 * # Safety
 * `mv` must be a live handle; `re` and `im` must be valid for writes.
 */
enum SpincStatus spinc_multivector_get(const struct SpincMultivector *mv,
                                       size_t blade,
                                       double *re,
                                       double *im);

/**
 * Geometric product `a b` as a new handle.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` valid for writes.
 */
enum SpincStatus spinc_multivector_product(const struct SpincMultivector *a,
                                           const struct SpincMultivector *b,
                                           struct SpincMultivector **out);

/**
 * Conjugate-linear anti-automorphism `tau(a)` as a new handle.
 *
 * # Safety
 * `a` must be a live handle and `out` valid for writes.
 */
enum SpincStatus spinc_multivector_tau(const struct SpincMultivector *a,
                                       struct SpincMultivector **out);

/**
 * Runs the algebra identity suite on dimensions 2..=`max_dim`.
 *
 * # Safety
 * `passed` must be NULL or valid for writes.
 */
enum SpincStatus spinc_verify_algebra(uint64_t seed, size_t trials, size_t max_dim, bool *passed);

/**
 * Verifies the named scenario on a grid with `axes` entries of `extents`.
 * `gauge` is `none`, `const:THETA`, `uv`, or NULL for none. A summary is
 * written to `out` whenever the run completes, including when checks fail
 * (status [`SpincStatus::CheckFailed`]).
 *
 * # Safety
 * `scenario` and `gauge` must be NULL or NUL-terminated strings, `extents`
 * must point to `axes` readable values and `out` must be valid for writes.
 */
enum SpincStatus spinc_verify_scenario(const char *scenario,
                                       const size_t *extents,
                                       size_t axes,
                                       const char *gauge,
                                       struct SpincRunSummary **out);

/**
 * # Safety
 * `summary` must be NULL or a live handle.
 */
void spinc_summary_free(struct SpincRunSummary *summary);

/**
 * # Safety
 * `summary` must be NULL or a live handle.
 */
bool spinc_summary_passed(const struct SpincRunSummary *summary);

/**
 * Reads one numeric summary entry: `max_killing_residual`, `max_dxi`,
 * `metric_err`, `B_err`, `normconn_err`, `roundtrip_rms`,
 * `path_discrepancy` or `unit_defect`.
 *
 * # Safety
 * `summary` must be a live handle, `key` a NUL-terminated string and
 * `value` valid for writes.
 */
enum SpincStatus spinc_summary_value(const struct SpincRunSummary *summary,
                                     const char *key,
                                     double *value);

/**
 * Summary as JSON; release with [`spinc_string_free`]. NULL on a NULL handle.
 *
 * # Safety
 * `summary` must be NULL or a live handle.
 */
char *spinc_summary_json(const struct SpincRunSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINC_H */
