#ifndef KIDCHECK_H
#define KIDCHECK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KcStatus {
  KC_STATUS_OK = 0,
  KC_STATUS_NULL_POINTER = 1,
  KC_STATUS_INVALID_UTF8 = 2,
  KC_STATUS_DOMAIN = 3,
  KC_STATUS_ORDER = 4,
  KC_STATUS_SINGULAR_METRIC = 5,
  KC_STATUS_PARAM = 6,
  KC_STATUS_DEFINITENESS = 7,
  KC_STATUS_MODEL = 8,
  KC_STATUS_SELF_CHECK = 9,
  KC_STATUS_NO_PERIODIC_ORBIT = 10,
  KC_STATUS_TOLERANCE = 11,
  KC_STATUS_NON_CONSTANT = 12,
  KC_STATUS_DEGENERATE = 13,
  KC_STATUS_CONFIG = 14,
  KC_STATUS_IO = 15,
  KC_STATUS_PANIC = 16,
} KcStatus;

/**
 * A built model (metric, named fields, chart).
 */
typedef struct KcModel KcModel;

/**
 * A finished command report.
 */
typedef struct KcReport KcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *kc_last_error(void);

/**
 * Library version as a static string.
 */
const char *kc_version(void);

/**
 * Builds a model from a descriptor such as `sphere:n=3,r=1`.
 *
 * # Safety
 * `descriptor` must be a NUL-terminated string; `out` must be writable.
 */
enum KcStatus kc_model_new(const char *descriptor, struct KcModel **out);

/**
 * # Safety
 * `model` must come from `kc_model_new` and not be freed twice. Null is ignored.
 */
void kc_model_free(struct KcModel *model);

/**
 * Chart dimension, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t kc_model_dim(const struct KcModel *model);

/**
 * Scalar curvature at a chart point of length `dim`.
 *
 * # Safety
 * `point` must hold `len` doubles; `out` must be writable.
 */
enum KcStatus kc_model_scal(const struct KcModel *model,
                            const double *point,
                            size_t len,
                            double *out);

/**
 * Sup-norm residual of a KID system (`sigma`, `sigma1`..`sigma4`) over `samples` seeded points.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum KcStatus kc_model_sigma_residual(const struct KcModel *model,
                                      const char *kid,
                                      const char *system,
                                      size_t samples,
                                      uint64_t seed,
                                      double *out);

/**
 * Runs a command described by a TOML configuration and returns its report.
 *
 * Module errors inside the run end up in the report, not in the status.
 *
 * # Safety
 * `config_toml` must be NUL-terminated; `out` must be writable.
 */
enum KcStatus kc_run_toml(const char *config_toml, struct KcReport **out);

/**
 * 1 if the report passed, 0 if not, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
int kc_report_verdict(const struct KcReport *report);

/**
 * Number of error entries in the report, 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t kc_report_error_count(const struct KcReport *report);

/**
 * Report as JSON; with `canonical` nonzero the timestamp is blanked. Free with `kc_string_free`.
 * Returns null for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
char *kc_report_json(const struct KcReport *report, int canonical);

/**
 * # Safety
 * `report` must come from `kc_run_toml` and not be freed twice. Null is ignored.
 */
void kc_report_free(struct KcReport *report);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void kc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KIDCHECK_H */
