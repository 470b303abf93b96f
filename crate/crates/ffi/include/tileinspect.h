#pragma once

/* Generated by cbindgen from the tileinspect-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C-ABI call.
 */
typedef enum TiStatus {
  /**
   * The call succeeded and out-pointers are filled in.
   */
  TI_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TI_STATUS_NULL_ARGUMENT = 1,
  /**
   * A scalar argument was out of its documented range.
   */
  TI_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Encoded bytes could not be decoded or validated.
   */
  TI_STATUS_FORMAT_ERROR = 3,
  /**
   * A transform or comparison rejected the data (shape, levels).
   */
  TI_STATUS_TRANSFORM_ERROR = 4,
  /**
   * A caller-provided buffer is too small.
   */
  TI_STATUS_BUFFER_TOO_SMALL = 5,
} TiStatus;

/**
 * Inspection verdict.
 */
typedef enum TiVerdict {
  TI_VERDICT_OK = 0,
  TI_VERDICT_DEFECTIVE = 1,
} TiVerdict;

/**
 * Opaque grayscale image handle (row-major f64 samples).
 */
typedef struct TiImage TiImage;

/**
 * Opaque multilevel decomposition handle.
 */
typedef struct TiPyramid TiPyramid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the crate version as a static NUL-terminated string.
 */
const char *ti_version(void);

/**
 * Returns the message for the most recent failure on this thread. The
 * pointer stays valid until the next call into this library from the
 * same thread.
 */
const char *ti_last_error_message(void);

/**
 * Creates an image from `rows * cols` row-major samples.
 *
 * # Safety
 * `data` must point to at least `rows * cols` readable f64 values and
 * `out` must be a valid pointer.
 */
enum TiStatus ti_image_new(uint32_t rows, uint32_t cols, const double *data, struct TiImage **out);

/**
 * Decodes a PGM buffer (P2 or P5) into a new image handle.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be valid.
 */
enum TiStatus ti_image_from_pgm(const uint8_t *bytes, uintptr_t len, struct TiImage **out);

/**
 * Encodes an image as PGM (binary `P5` when `binary`, plain `P2`
 * otherwise). The buffer written to `out_bytes`/`out_len` is released
 * with [`ti_buffer_free`].
 *
 * # Safety
 * All pointers must be valid; `image` must be a live handle.
 */
enum TiStatus ti_image_to_pgm(const struct TiImage *image,
                              bool binary,
                              uint8_t **out_bytes,
                              uintptr_t *out_len);

/**
 * Reports an image's dimensions.
 *
 * # Safety
 * All pointers must be valid; `image` must be a live handle.
 */
enum TiStatus ti_image_dims(const struct TiImage *image, uint32_t *rows, uint32_t *cols);

/**
 * Copies an image's row-major samples into `out`, which holds `capacity`
 * f64 slots; fails with `TI_STATUS_BUFFER_TOO_SMALL` if `capacity` is
 * less than rows * cols.
 *
 * # Safety
 * `out` must point to at least `capacity` writable f64 values.
 */
enum TiStatus ti_image_copy_data(const struct TiImage *image, double *out, uintptr_t capacity);

/**
 * Releases an image handle. Null is a no-op.
 *
 * # Safety
 * `image` must be a pointer previously returned by this library and not
 * yet freed.
 */
void ti_image_free(struct TiImage *image);

/**
 * Decomposes an image into a `levels`-deep pyramid. With `pad`, images
 * whose dimensions are not divisible by 2^levels are padded by edge
 * replication first. `levels` must be in 1..=24.
 *
 * # Safety
 * `image` must be a live handle and `out` a valid pointer.
 */
enum TiStatus ti_decompose(const struct TiImage *image,
                           uint32_t levels,
                           bool pad,
                           struct TiPyramid **out);

/**
 * Reports a pyramid's level count and pre-padding source dimensions.
 *
 * # Safety
 * All pointers must be valid; `pyramid` must be a live handle.
 */
enum TiStatus ti_pyramid_info(const struct TiPyramid *pyramid,
                              uint32_t *levels,
                              uint32_t *source_rows,
                              uint32_t *source_cols);

/**
 * Copies a pyramid's approximation matrix into a new image handle.
 *
 * # Safety
 * `pyramid` must be a live handle and `out` a valid pointer.
 */
enum TiStatus ti_pyramid_approximation(const struct TiPyramid *pyramid, struct TiImage **out);

/**
 * Rebuilds the source image from a pyramid (cropping any padding).
 *
 * # Safety
 * `pyramid` must be a live handle and `out` a valid pointer.
 */
enum TiStatus ti_reconstruct(const struct TiPyramid *pyramid, struct TiImage **out);

/**
 * Serializes a pyramid to its binary file format. Release the buffer
 * with [`ti_buffer_free`].
 *
 * # Safety
 * All pointers must be valid; `pyramid` must be a live handle.
 */
enum TiStatus ti_pyramid_to_bytes(const struct TiPyramid *pyramid,
                                  uint8_t **out_bytes,
                                  uintptr_t *out_len);

/**
 * Deserializes a pyramid from its binary file format.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be valid.
 */
enum TiStatus ti_pyramid_from_bytes(const uint8_t *bytes, uintptr_t len, struct TiPyramid **out);

/**
 * Releases a pyramid handle. Null is a no-op.
 *
 * # Safety
 * `pyramid` must be a pointer previously returned by this library and
 * not yet freed.
 */
void ti_pyramid_free(struct TiPyramid *pyramid);

/**
 * Euclidean distance between two equally shaped images (typically two
 * approximation matrices).
 *
 * # Safety
 * `a` and `b` must be live handles and `out` a valid pointer.
 */
enum TiStatus ti_euclidean_distance(const struct TiImage *a, const struct TiImage *b, double *out);

/**
 * Full inspection of `test` against `reference`: decompose both to
 * `levels`, compare approximations, classify against `threshold`.
 * `threshold` must be finite and nonnegative.
 *
 * # Safety
 * `reference` and `test` must be live handles; out-pointers must be
 * valid.
 */
enum TiStatus ti_inspect(const struct TiImage *reference,
                         const struct TiImage *test,
                         uint32_t levels,
                         double threshold,
                         bool pad,
                         double *out_distance,
                         enum TiVerdict *out_verdict);

/**
 * Builds the full-resolution defect map for a reference/test pair:
 * samples are 1.0 where the approximation moved more than
 * `coeff_threshold`, else 0.0, at the source resolution.
 *
 * # Safety
 * `reference` and `test` must be live handles and `out_map` valid.
 */
enum TiStatus ti_defect_map(const struct TiImage *reference,
                            const struct TiImage *test,
                            uint32_t levels,
                            double coeff_threshold,
                            bool pad,
                            struct TiImage **out_map);

/**
 * Releases a byte buffer returned by this library. Null is a no-op;
 * `len` must be the length the library reported for it.
 *
 * # Safety
 * `bytes` must be a buffer pointer previously returned by this library
 * with length `len`, not yet freed.
 */
void ti_buffer_free(uint8_t *bytes, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
