#ifndef ARGI_H
#define ARGI_H

/* Generated by cbindgen from the argi-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Estimation methods exposed through the C ABI.
 */
typedef enum ArgiMethod {
  ARGI_METHOD_OLS = 0,
  ARGI_METHOD_HUBER = 1,
  ARGI_METHOD_ADJ_HUBER = 2,
  ARGI_METHOD_QMLE = 3,
} ArgiMethod;

/**
 * Status codes returned by every fallible call.
 */
typedef enum ArgiStatus {
  ARGI_STATUS_OK = 0,
  ARGI_STATUS_NULL_ARGUMENT = 1,
  ARGI_STATUS_INVALID_ARGUMENT = 2,
  ARGI_STATUS_INSUFFICIENT_DATA = 3,
  ARGI_STATUS_DEGENERATE = 4,
  ARGI_STATUS_ESTIMATION_FAILED = 5,
  ARGI_STATUS_SINGULAR = 6,
  ARGI_STATUS_RUNTIME_ERROR = 7,
} ArgiStatus;

/**
 * Opaque daily series handle.
 */
typedef struct ArgiDailySeries ArgiDailySeries;

/**
 * Opaque fit handle.
 */
typedef struct ArgiFit ArgiFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *argi_version(void);

/**
 * Message of the last error on this thread; valid until the next failing
 * call on the same thread.
 */
const char *argi_last_error_message(void);

/**
 * Creates a daily series from aligned columns of length `len`.
 *
 * # Safety
 * `v_hat`, `rv`, and `ret` must point to `len` readable doubles; `out` must
 * be a valid pointer to receive the handle.
 */
enum ArgiStatus argi_daily_series_new(const double *v_hat,
                                      const double *rv,
                                      const double *ret,
                                      uintptr_t len,
                                      struct ArgiDailySeries **out);

/**
 * Frees a daily series handle; `series` may be NULL.
 *
 * # Safety
 * `series` must be a pointer returned by [`argi_daily_series_new`], not yet
 * freed.
 */
void argi_daily_series_free(struct ArgiDailySeries *series);

/**
 * Number of days in a series handle.
 *
 * # Safety
 * `series` must be a live handle.
 */
uintptr_t argi_daily_series_len(const struct ArgiDailySeries *series);

/**
 * Maps structural parameters to `theta = (omega_g, gamma, alpha_g, beta_g)`.
 * `lambda`, `c_j`, `df` describe the jump law (`lambda = 0` disables jumps).
 *
 * # Safety
 * `theta_out` must point to 4 writable doubles.
 */
enum ArgiStatus argi_structural_to_garch(double mu,
                                         double omega1,
                                         double omega2,
                                         double gamma,
                                         double alpha,
                                         double beta,
                                         double lambda,
                                         double c_j,
                                         double df,
                                         double *theta_out);

/**
 * Pre-averaging realized volatility for one day of tick log-prices (the
 * day's open must be included as the first entry). Writes the
 * total-variation estimate to `v_hat_out` and, when `c_varpi > 0`, the
 * jump-truncated estimate to `rv_out` (otherwise `rv_out` receives the total).
 *
 * # Safety
 * `prices` must point to `len` readable doubles; the output pointers must be
 * writable.
 */
enum ArgiStatus argi_prv_day(const double *prices,
                             uintptr_t len,
                             double c_varpi,
                             double *v_hat_out,
                             double *rv_out);

/**
 * Fits theta on a daily series. `rgi` freezes the leverage loading at zero.
 *
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum ArgiStatus argi_fit(const struct ArgiDailySeries *series,
                         enum ArgiMethod method,
                         bool rgi,
                         struct ArgiFit **out);

/**
 * Frees a fit handle; `fit` may be NULL.
 *
 * # Safety
 * `fit` must be a pointer returned by [`argi_fit`], not yet freed.
 */
void argi_fit_free(struct ArgiFit *fit);

/**
 * Copies the fitted theta into `theta_out[4]`.
 *
 * # Safety
 * `fit` must be a live handle; `theta_out` must point to 4 writable doubles.
 */
enum ArgiStatus argi_fit_theta(const struct ArgiFit *fit, double *theta_out);

/**
 * Whether the optimizer converged.
 *
 * # Safety
 * `fit` must be a live handle.
 */
bool argi_fit_converged(const struct ArgiFit *fit);

/**
 * Final objective value of the fit.
 *
 * # Safety
 * `fit` must be a live handle.
 */
double argi_fit_objective(const struct ArgiFit *fit);

/**
 * Truncation tuning of a Huber-family fit; fails with
 * `ARGI_STATUS_INVALID_ARGUMENT` for OLS/QMLE fits.
 *
 * # Safety
 * `fit` must be a live handle; the output pointers must be writable.
 */
enum ArgiStatus argi_fit_tuning(const struct ArgiFit *fit, double *b_hat_out, double *tau_n_out);

/**
 * One-day-ahead volatility forecast from a fit over a series (floored at the
 * published-forecast lower bound).
 *
 * # Safety
 * `fit` and `series` must be live handles; `out` must be writable.
 */
enum ArgiStatus argi_forecast_next(const struct ArgiFit *fit,
                                   const struct ArgiDailySeries *series,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARGI_H */
