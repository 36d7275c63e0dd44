#ifndef SOBOLEV_GROWTH_H
#define SOBOLEV_GROWTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_INVALID_ARGUMENT = 1,
  SG_STATUS_NULL_POINTER = 2,
  SG_STATUS_NUMERICAL = 3,
  SG_STATUS_IO = 4,
  SG_STATUS_INTERNAL = 5,
} SgStatus;

/**
 * Diffusion channel orbit.
 */
typedef struct SgChannel SgChannel;

/**
 * Result of a full experiment run.
 */
typedef struct SgReport SgReport;

/**
 * Threshold constants; natural logarithms where the value overflows, NaN
 * where it is undefined.
 */
typedef struct SgConstants {
  uint32_t p;
  double gamma;
  double a;
  double b;
  double log_mu0;
  double log_c0;
  double log_c1;
  double log_c1_tilde;
  double log_xi;
  double sigma1;
  double sigma2;
  double log_c_plus;
  double log_c_minus;
  double log_f_gamma;
  bool checks_hold;
} SgConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *sg_last_error(void);

/**
 * Static version string.
 */
const char *sg_version(void);

/**
 * `min n |sqrt(2) n + m|` over `1 <= n <= n_bound`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SgStatus sg_gamma_sqrt2(uint64_t n_bound, double *out);

/**
 * Integrates the wave channel `(1, p)` at height `c` from `I_p = eps`.
 *
 * # Safety
 * `out` must be valid for writes; the handle is released with [`sg_channel_free`].
 */
enum SgStatus sg_channel_new_wave(uint32_t p, double c, double eps, struct SgChannel **out);

/**
 * Integrates the NLS channel on the tangential modes `k[0..4]`.
 *
 * # Safety
 * `k` must point to four readable values and `out` must be valid for writes.
 */
enum SgStatus sg_channel_new_nls(const int64_t *k, double c, double eps, struct SgChannel **out);

/**
 * Diffusion time of the orbit.
 *
 * # Safety
 * `channel` must come from a channel constructor; `out` must be valid for writes.
 */
enum SgStatus sg_channel_t0(const struct SgChannel *channel, double *out);

/**
 * Analytic bracket of the diffusion time. Any output pointer may be null.
 *
 * # Safety
 * `channel` must come from a channel constructor; non-null outputs must be valid for writes.
 */
enum SgStatus sg_channel_bounds(const struct SgChannel *channel,
                                double *lower,
                                double *upper,
                                double *lower_slack);

/**
 * Copies the final actions into `out[0..len]` and stores their count in
 * `count`. Fails with `SG_STATUS_INVALID_ARGUMENT` when `len` is too small.
 *
 * # Safety
 * `out` must be valid for `len` writes and `count` for one.
 */
enum SgStatus sg_channel_final_actions(const struct SgChannel *channel,
                                       double *out,
                                       size_t len,
                                       size_t *count);

/**
 * # Safety
 * `channel` must come from a channel constructor and not be used afterwards.
 */
void sg_channel_free(struct SgChannel *channel);

/**
 * Evaluates the threshold constants; `c_minus <= 0` selects the default.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SgStatus sg_constants_evaluate(uint32_t p,
                                    double gamma,
                                    double c_minus,
                                    struct SgConstants *out);

/**
 * Runs the experiment described by a TOML config.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out` must be valid for
 * writes. The report is released with [`sg_report_free`].
 */
enum SgStatus sg_experiment_run(const char *config_toml, struct SgReport **out);

/**
 * `||z(T)||_s / ||z(0)||_s`.
 *
 * # Safety
 * `report` must come from [`sg_experiment_run`]; `out` must be valid for writes.
 */
enum SgStatus sg_report_ratio(const struct SgReport *report, double *out);

/**
 * Serializes the report; the string is released with [`sg_string_free`].
 *
 * # Safety
 * `report` must come from [`sg_experiment_run`]; `out` must be valid for writes.
 */
enum SgStatus sg_report_to_json(const struct SgReport *report, char **out);

/**
 * # Safety
 * `report` must come from [`sg_experiment_run`] and not be used afterwards.
 */
void sg_report_free(struct SgReport *report);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void sg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOBOLEV_GROWTH_H */
