#ifndef TSADBENCH_H
#define TSADBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TsadStatus {
  TSAD_STATUS_OK = 0,
  TSAD_STATUS_NULL_POINTER = 1,
  TSAD_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad argument, hyperparameter or JSON spec.
   */
  TSAD_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Data the operation cannot handle (too short, degenerate, one class).
   */
  TSAD_STATUS_DATA_ERROR = 4,
  TSAD_STATUS_PANIC = 5,
} TsadStatus;

typedef enum TsadCurve {
  TSAD_CURVE_ROC = 0,
  TSAD_CURVE_PR = 1,
} TsadCurve;

/**
 * Unfitted detector.
 */
typedef struct TsadDetector TsadDetector;

/**
 * Fitted detector; scoring does not mutate it.
 */
typedef struct TsadFitted TsadFitted;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread ("" after a success).
 * Valid until the next call on the same thread.
 */
const char *tsad_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tsad_version(void);

/**
 * Build a detector from a JSON spec such as
 * `{"kind": "lof", "params": {"k": 10}, "seed": 1}`. `window` is the
 * fallback window for specs without one; 0 means none.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum TsadStatus tsad_detector_new(const char *spec_json, size_t window, struct TsadDetector **out);

/**
 * # Safety
 * `detector` must come from [`tsad_detector_new`] and not be freed twice.
 */
void tsad_detector_free(struct TsadDetector *detector);

/**
 * Fewest training rows the detector accepts.
 *
 * # Safety
 * `detector` must be a live handle; `out` must be writable.
 */
enum TsadStatus tsad_detector_min_train_rows(const struct TsadDetector *detector, size_t *out);

/**
 * Fit on a row-major `rows x cols` matrix. `data` may be null when
 * `rows == 0` (fit-free kinds).
 *
 * # Safety
 * `detector` must be a live handle; `data` must hold `rows * cols` values;
 * `out` must be writable.
 */
enum TsadStatus tsad_detector_fit(const struct TsadDetector *detector,
                                  const double *data,
                                  size_t rows,
                                  size_t cols,
                                  struct TsadFitted **out);

/**
 * # Safety
 * `fitted` must come from [`tsad_detector_fit`] and not be freed twice.
 */
void tsad_fitted_free(struct TsadFitted *fitted);

/**
 * Score a row-major `rows x cols` matrix into `scores` (`rows` values).
 *
 * # Safety
 * `fitted` must be a live handle; `data` must hold `rows * cols` values and
 * `scores` room for `rows`.
 */
enum TsadStatus tsad_fitted_score(const struct TsadFitted *fitted,
                                  const double *data,
                                  size_t rows,
                                  size_t cols,
                                  bool overlapping,
                                  double *scores);

/**
 * AUC of `scores` against binary `labels`.
 *
 * # Safety
 * `scores` and `labels` must hold `len` values; `out` must be writable.
 */
enum TsadStatus tsad_auc(const double *scores,
                         const uint8_t *labels,
                         size_t len,
                         enum TsadCurve curve,
                         double *out);

/**
 * Volume under the range-AUC surface for buffers up to `l_max` points.
 *
 * # Safety
 * `scores` and `labels` must hold `len` values; `out` must be writable.
 */
enum TsadStatus tsad_vus(const double *scores,
                         const uint8_t *labels,
                         size_t len,
                         double l_max,
                         enum TsadCurve curve,
                         double *out);

/**
 * Every metric, as a JSON object
 * `{"entries": {...}, "threshold_used": t, "best_thresholds": {...}}`.
 * Free the string with [`tsad_string_free`].
 *
 * # Safety
 * `scores` and `labels` must hold `len` values; `out_json` must be writable.
 */
enum TsadStatus tsad_evaluate_json(const double *scores,
                                   const uint8_t *labels,
                                   size_t len,
                                   double buffer,
                                   char **out_json);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void tsad_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSADBENCH_H */
