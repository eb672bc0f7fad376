#ifndef MORREY_BILINEAR_H
#define MORREY_BILINEAR_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MbFamily {
  MB_FAMILY_DYADIC = 0,
  MB_FAMILY_ALL_ALIGNED = 1,
} MbFamily;

typedef enum MbStatus {
  MB_STATUS_OK = 0,
  MB_STATUS_NULL_POINTER = 1,
  MB_STATUS_INVALID_PARAMETER = 2,
  MB_STATUS_HYPOTHESIS = 3,
  MB_STATUS_LEVEL_OUT_OF_RANGE = 4,
  MB_STATUS_GRID_MISMATCH = 5,
  MB_STATUS_NON_POSITIVE = 6,
  MB_STATUS_CLIPPED_CUBE = 7,
  MB_STATUS_UNRESOLVABLE = 8,
  MB_STATUS_NUMERICAL = 9,
  MB_STATUS_PARSE = 10,
  MB_STATUS_IO = 11,
  MB_STATUS_PANIC = 12,
} MbStatus;

/**
 * Opaque grid function.
 */
typedef struct MbFunction MbFunction;

/**
 * Opaque weight triple `(v, w1, w2)` on a common grid.
 */
typedef struct MbWeights MbWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a function on `[0,1)^dim` at `depth` from `2^(dim·depth)` row-major values.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` must be writable.
 */
enum MbStatus mb_function_new(size_t dim,
                              uint32_t depth,
                              const double *values,
                              size_t len,
                              struct MbFunction **out);

/**
 * # Safety
 * `file` must be a NUL-terminated path and `out` must be writable.
 */
enum MbStatus mb_function_read_mgf(const char *file, struct MbFunction **out);

/**
 * # Safety
 * `f` must be a live handle and `file` a NUL-terminated path.
 */
enum MbStatus mb_function_write_mgf(const struct MbFunction *f, const char *file);

/**
 * Number of cells, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t mb_function_len(const struct MbFunction *f);

/**
 * Copies the cell values into `buf`, which must hold exactly `len` doubles.
 *
 * # Safety
 * `f` must be a live handle and `buf` must point to `len` writable doubles.
 */
enum MbStatus mb_function_values(const struct MbFunction *f, double *buf, size_t len);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void mb_function_free(struct MbFunction *f);

/**
 * Bilinear fractional integral of `f` and `g`.
 *
 * # Safety
 * `f`, `g` must be live handles and `out` must be writable.
 */
enum MbStatus mb_b_alpha(const struct MbFunction *f,
                         const struct MbFunction *g,
                         double alpha,
                         struct MbFunction **out);

/**
 * Linear fractional integral of `f`.
 *
 * # Safety
 * `f` must be a live handle and `out` must be writable.
 */
enum MbStatus mb_i_alpha(const struct MbFunction *f, double alpha, struct MbFunction **out);

/**
 * # Safety
 * `f` must be a live handle and `out` must be writable.
 */
enum MbStatus mb_morrey_norm(const struct MbFunction *f,
                             double p,
                             double q,
                             enum MbFamily fam,
                             double *out);

/**
 * Lebesgue norm over the root cube.
 *
 * # Safety
 * `f` must be a live handle and `out` must be writable.
 */
enum MbStatus mb_lebesgue_norm(const struct MbFunction *f, double p, double *out);

/**
 * Weight triple from three positive functions on the same grid. The inputs
 * are copied and stay owned by the caller.
 *
 * # Safety
 * `v`, `w1`, `w2` must be live handles and `out` must be writable.
 */
enum MbStatus mb_weights_new(const struct MbFunction *v,
                             const struct MbFunction *w1,
                             const struct MbFunction *w2,
                             struct MbWeights **out);

/**
 * # Safety
 * `w` must be null or a handle not yet freed.
 */
void mb_weights_free(struct MbWeights *w);

/**
 * Two-weight characteristic; the variant follows from `s`.
 *
 * # Safety
 * `w` must be a live handle and `out` must be writable.
 */
enum MbStatus mb_char_two_weight(const struct MbWeights *w,
                                 double alpha,
                                 double q1,
                                 double q2,
                                 double p,
                                 double s,
                                 double t,
                                 double r,
                                 double a,
                                 enum MbFamily fam,
                                 double *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len − 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t mb_last_error_message(char *buf, size_t len);

/**
 * Static name of a status code.
 */
const char *mb_status_name(enum MbStatus s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MORREY_BILINEAR_H */
