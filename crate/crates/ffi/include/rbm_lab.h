/* C interface of the rbm-lab numerical laboratory. */

#ifndef RBM_LAB_H
#define RBM_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum RbmStatus {
  // The call succeeded.
  RBM_STATUS_OK = 0,
  // An argument lies outside a routine's validity window.
  RBM_STATUS_DOMAIN = 1,
  // Array or grid dimensions are inconsistent.
  RBM_STATUS_DIMENSION = 2,
  // A numerical procedure failed its accuracy or stability contract.
  RBM_STATUS_NUMERICS = 3,
  // Invalid configuration key or value.
  RBM_STATUS_CONFIG = 4,
  // I/O failure.
  RBM_STATUS_IO = 5,
  // A required pointer argument was null.
  RBM_STATUS_NULL_POINTER = 6,
  // An internal panic was caught at the boundary.
  RBM_STATUS_PANIC = 7,
} RbmStatus;

// Opaque experiment configuration handle.
typedef struct RbmConfig RbmConfig;

// Opaque simulation-versus-formula comparison report handle.
typedef struct RbmReport RbmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string.
const char *rbm_version(void);

// Returns the message of the most recent error on the calling thread.
// The pointer stays valid until the next failing call on this thread.
const char *rbm_last_error(void);

// Creates a configuration with default values (compare mode, t = 1000,
// delta = 0.5, one observation point r = 0). Returns null only on
// allocation failure.
struct RbmConfig *rbm_config_new(void);

// Releases a configuration handle. Null is ignored.
void rbm_config_free(struct RbmConfig *config);

// Applies one key=value override. Keys match the configuration-file
// format: mode, t, delta, r, s, trials, h, j, nodes, smax, seed,
// format, out. Keys `r` and `s` accept comma-separated lists.
//
// # Safety
// `key` and `value` must be valid NUL-terminated strings.
enum RbmStatus rbm_config_set(struct RbmConfig *config, const char *key, const char *value);

// Evaluates the limit CDF of the configured frame at the threshold
// vector `s` of length `len` (one threshold per configured observation
// point; the finite-step law when delta > 0, the stationary law at
// delta = 0) and stores the probability in `out`.
//
// # Safety
// `s` must point to `len` readable doubles and `out` to one writable
// double.
enum RbmStatus rbm_limit_cdf(const struct RbmConfig *config,
                             const double *s,
                             size_t len,
                             double *out);

// Number of doubles `rbm_simulate` will write: trials × (number of
// observation points).
size_t rbm_sample_count(const struct RbmConfig *config);

// Draws the configured Monte Carlo samples and writes them to `out` in
// trial-major order (all observation points of trial 0, then trial 1,
// ...). `capacity` must be at least `rbm_sample_count(config)`.
//
// # Safety
// `out` must point to `capacity` writable doubles.
enum RbmStatus rbm_simulate(const struct RbmConfig *config, double *out, size_t capacity);

// Runs a simulation-versus-formula comparison and stores the report
// handle in `out`. The caller owns the report and must release it with
// `rbm_report_free`.
//
// # Safety
// `out` must point to one writable pointer.
enum RbmStatus rbm_compare(const struct RbmConfig *config, struct RbmReport **out);

// Releases a report handle. Null is ignored.
void rbm_report_free(struct RbmReport *report);

// Kolmogorov–Smirnov distance of the report (sup over the table of
// |F_empirical − F_formula|). Returns NaN for a null handle.
double rbm_report_ks(const struct RbmReport *report);

// Number of rows in the comparison table. Returns 0 for a null handle.
size_t rbm_report_len(const struct RbmReport *report);

// Copies row `index` of the comparison table into the non-null output
// pointers (threshold, empirical CDF, formula CDF, absolute gap).
//
// # Safety
// Each non-null output pointer must point to one writable double.
enum RbmStatus rbm_report_row(const struct RbmReport *report,
                              size_t index,
                              double *s,
                              double *f_empirical,
                              double *f_formula,
                              double *abs_diff);

// Renders the report as CSV. The returned string must be released with
// `rbm_string_free`. Returns null for a null handle.
char *rbm_report_csv(const struct RbmReport *report);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `text` must have been returned by `rbm_report_csv` and not freed yet.
void rbm_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RBM_LAB_H */
