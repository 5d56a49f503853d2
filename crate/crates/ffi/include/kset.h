#ifndef KSET_H
#define KSET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KsetStatus {
  KSET_STATUS_OK = 0,
  KSET_STATUS_NULL_POINTER = 1,
  KSET_STATUS_INVALID_ARGUMENT = 2,
  KSET_STATUS_BUFFER_TOO_SMALL = 3,
  KSET_STATUS_INVARIANT = 4,
  KSET_STATUS_IO = 5,
  KSET_STATUS_PANIC = 6,
} KsetStatus;

/**
 * Which of the two complementary probabilities to format.
 */
typedef enum KsetQuantity {
  /**
   * Probability that some `k`-set is fixed.
   */
  KSET_QUANTITY_FIX = 0,
  /**
   * Probability that no `k`-set is fixed.
   */
  KSET_QUANTITY_SURVIVAL = 1,
} KsetQuantity;

/**
 * Exact limiting survival probability for one `k`. Opaque to C.
 */
typedef struct KsetLimit KsetLimit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Valid until the next failing call.
 */
const char *kset_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kset_version(void);

/**
 * Computes the limiting probability for `k` and stores a new handle in `*out`.
 *
 * # Safety
 * `out` must be a valid pointer. Release the handle with [`kset_limit_free`].
 */
enum KsetStatus kset_limit_new(uint32_t k, struct KsetLimit **out);

/**
 * # Safety
 * `h` must come from [`kset_limit_new`] and not be used afterwards. Null is ignored.
 */
void kset_limit_free(struct KsetLimit *h);

/**
 * Number of table rows that contributed.
 *
 * # Safety
 * `h` must be a live handle and `rows` a valid pointer.
 */
enum KsetStatus kset_limit_rows(const struct KsetLimit *h, uint64_t *rows);

/**
 * Formats the chosen probability with `digits` correct decimal places.
 *
 * # Safety
 * `h` must be a live handle; see [`write_str`] for the buffer contract.
 */
enum KsetStatus kset_limit_format(const struct KsetLimit *h,
                                  enum KsetQuantity quantity,
                                  uint32_t digits,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

/**
 * Exact finite-degree probability `i(n,k)` (or its complement), rounded.
 *
 * # Safety
 * See [`write_str`] for the buffer contract.
 */
enum KsetStatus kset_finite_format(uint32_t n,
                                   uint32_t k,
                                   enum KsetQuantity quantity,
                                   uint32_t digits,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

/**
 * Writes the exception pairs for degrees up to `n_max` as `n, k` pairs into
 * `pairs` (room for `capacity` pairs, i.e. `2 * capacity` integers).
 * `*count` receives the number of pairs found even when the buffer is short.
 *
 * # Safety
 * `pairs` must be valid for `2 * capacity` writes (or null with capacity 0);
 * `count` must be valid.
 */
enum KsetStatus kset_exceptions(uint32_t n_max, uint32_t *pairs, size_t capacity, size_t *count);

/**
 * Monte-Carlo estimate of the limiting survival probability.
 *
 * # Safety
 * `estimate` and `std_error` must be valid pointers.
 */
enum KsetStatus kset_mc_limit_survival(uint32_t k,
                                       uint64_t samples,
                                       uint64_t seed,
                                       double *estimate,
                                       double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSET_H */
