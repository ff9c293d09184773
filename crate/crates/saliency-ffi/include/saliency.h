#ifndef SALIENCY_H
#define SALIENCY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SalStatus {
  SalOk = 0,
  /**
   * A required pointer argument was null.
   */
  SalNullArgument = 1,
  /**
   * Invalid argument or geometry.
   */
  SalInvalidArgument = 2,
  /**
   * Input was valid but degenerate (empty sets, constant map).
   */
  SalDegenerate = 3,
  /**
   * Internal error; see `sal_last_error_message`.
   */
  SalInternal = 4,
} SalStatus;

/**
 * Opaque saliency map handle.
 */
typedef struct SalMap SalMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message on this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in
 * bytes, or 0 if no error is recorded.
 *
 * # Safety
 * `buf` must point to `len` writable bytes, or be null (query mode).
 */
uintptr_t sal_last_error_message(char *buf, uintptr_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sal_version(void);

/**
 * Pixels per degree of visual angle for a viewing setup.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SalStatus sal_pixels_per_degree(uint32_t screen_w_px,
                                     uint32_t screen_h_px,
                                     double screen_diagonal_in,
                                     double viewing_distance_cm,
                                     uint32_t display_w_px,
                                     uint32_t display_h_px,
                                     double *out);

/**
 * Create a map from `width * height` row-major nonnegative values.
 * Returns null on error (query `sal_last_error_message`).
 *
 * # Safety
 * `values` must point to `width * height` readable doubles.
 */
struct SalMap *sal_map_new(uintptr_t width, uintptr_t height, const double *values);

/**
 * Gaussian blob map: unit peak at the pixel nearest the center,
 * truncated at four sigma. Returns null on error.
 */
struct SalMap *sal_map_gaussian(uintptr_t width,
                                uintptr_t height,
                                double center_x,
                                double center_y,
                                double sigma);

/**
 * Free a map handle; null is a no-op.
 *
 * # Safety
 * `map` must be a handle from this library, freed at most once.
 */
void sal_map_free(struct SalMap *map);

/**
 * # Safety
 * `map` must be a live handle.
 */
uintptr_t sal_map_width(const struct SalMap *map);

/**
 * # Safety
 * `map` must be a live handle.
 */
uintptr_t sal_map_height(const struct SalMap *map);

/**
 * Read one pixel.
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum SalStatus sal_map_get(const struct SalMap *map, uintptr_t x, uintptr_t y, double *out);

/**
 * Replace a map with its min-max normalization to [0, 1].
 *
 * # Safety
 * `map` must be a live handle.
 */
enum SalStatus sal_map_normalize(struct SalMap *map);

/**
 * Rank-based AUC between two sample arrays, ties counted half.
 *
 * # Safety
 * `positives`/`negatives` must point to `n_pos`/`n_neg` doubles; `out`
 * must be valid.
 */
enum SalStatus sal_auc(const double *positives,
                       uintptr_t n_pos,
                       const double *negatives,
                       uintptr_t n_neg,
                       double *out);

/**
 * Normalized scanpath saliency of a map at interleaved x,y gaze
 * coordinates, with the local-maximum radius in map pixels.
 *
 * # Safety
 * `gaze_xy` must point to `2 * n_points` doubles; `out` must be valid.
 */
enum SalStatus sal_nss(const struct SalMap *map,
                       const double *gaze_xy,
                       uintptr_t n_points,
                       double radius_px,
                       double *out);

/**
 * Fit the center-bias Gaussian to a gaze manifest and write the model
 * file, mirroring the CLI `fit-bias` command.
 *
 * # Safety
 * `manifest_path` and `out_path` must be NUL-terminated strings.
 */
enum SalStatus sal_fit_center_bias(const char *manifest_path, const char *out_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SALIENCY_H */
