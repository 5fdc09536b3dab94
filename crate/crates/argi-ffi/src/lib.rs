//! C ABI for the argi library: opaque handles, integer status codes, and a
//! thread-local last-error message. The header is generated into
//! `include/argi.h` by cbindgen at build time.
//!
//! Conventions: every fallible call returns [`ArgiStatus`]; `ARGI_STATUS_OK`
//! means output parameters are valid. Handles are created and destroyed by
//! matching `_new`/`_free` pairs and must not be shared across a free.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::ptr;
use std::slice;

use argi::estimate::{bias_adjust, fit, FitOptions, FitResult, Method};
use argi::filter::forecast_next;
use argi::model::{structural_to_garch, JumpLaw, ParamSpace, StructuralParams};
use argi::realized::{prv_integrated, prv_total, DailySeries, PrvConfig};
use argi::ArgiError;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(e: &ArgiError) {
    let msg = CString::new(e.to_string()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgiStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    Degenerate = 4,
    EstimationFailed = 5,
    Singular = 6,
    RuntimeError = 7,
}

fn status_of(e: &ArgiError) -> ArgiStatus {
    match e {
        ArgiError::InvalidParameter(_) | ArgiError::Domain(_) | ArgiError::Config(_) => {
            ArgiStatus::InvalidArgument
        }
        ArgiError::InsufficientData(_) => ArgiStatus::InsufficientData,
        ArgiError::Degenerate(_) => ArgiStatus::Degenerate,
        ArgiError::Estimation(_) => ArgiStatus::EstimationFailed,
        ArgiError::Singular(_) => ArgiStatus::Singular,
        _ => ArgiStatus::RuntimeError,
    }
}

fn fail(e: ArgiError) -> ArgiStatus {
    let code = status_of(&e);
    set_error(&e);
    code
}

/// Estimation methods exposed through the C ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgiMethod {
    Ols = 0,
    Huber = 1,
    AdjHuber = 2,
    Qmle = 3,
}

impl ArgiMethod {
    fn to_method(self) -> Method {
        match self {
            ArgiMethod::Ols => Method::Ols,
            ArgiMethod::Huber => Method::Huber,
            ArgiMethod::AdjHuber => Method::AdjHuber,
            ArgiMethod::Qmle => Method::Qmle,
        }
    }
}

/// Opaque daily series handle.
pub struct ArgiDailySeries {
    inner: DailySeries,
}

/// Opaque fit handle.
pub struct ArgiFit {
    inner: FitResult,
    rgi: bool,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn argi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last error on this thread; valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn argi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a daily series from aligned columns of length `len`.
///
/// # Safety
/// `v_hat`, `rv`, and `ret` must point to `len` readable doubles; `out` must
/// be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn argi_daily_series_new(
    v_hat: *const f64,
    rv: *const f64,
    ret: *const f64,
    len: usize,
    out: *mut *mut ArgiDailySeries,
) -> ArgiStatus {
    if v_hat.is_null() || rv.is_null() || ret.is_null() || out.is_null() {
        return ArgiStatus::NullArgument;
    }
    let v_hat = slice::from_raw_parts(v_hat, len).to_vec();
    let rv = slice::from_raw_parts(rv, len).to_vec();
    let ret = slice::from_raw_parts(ret, len).to_vec();
    let negative_days = v_hat
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 0.0)
        .map(|(d, _)| d)
        .collect();
    let series = DailySeries {
        v_hat,
        rv,
        ret,
        negative_days,
    };
    if let Err(e) = series.validate() {
        return fail(e);
    }
    *out = Box::into_raw(Box::new(ArgiDailySeries { inner: series }));
    ArgiStatus::Ok
}

/// Frees a daily series handle; `series` may be NULL.
///
/// # Safety
/// `series` must be a pointer returned by [`argi_daily_series_new`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn argi_daily_series_free(series: *mut ArgiDailySeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of days in a series handle.
///
/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn argi_daily_series_len(series: *const ArgiDailySeries) -> usize {
    if series.is_null() {
        return 0;
    }
    (*series).inner.n_days()
}

/// Maps structural parameters to `theta = (omega_g, gamma, alpha_g, beta_g)`.
/// `lambda`, `c_j`, `df` describe the jump law (`lambda = 0` disables jumps).
///
/// # Safety
/// `theta_out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn argi_structural_to_garch(
    mu: f64,
    omega1: f64,
    omega2: f64,
    gamma: f64,
    alpha: f64,
    beta: f64,
    lambda: f64,
    c_j: f64,
    df: f64,
    theta_out: *mut f64,
) -> ArgiStatus {
    if theta_out.is_null() {
        return ArgiStatus::NullArgument;
    }
    let params = StructuralParams {
        mu,
        omega1,
        omega2,
        gamma,
        alpha,
        beta,
        nu: 0.0,
        jump: JumpLaw {
            intensity: lambda,
            c_j,
            df,
        },
        noise_sd: 0.0,
        x0: 0.0,
        sigma0_sq: 1.0,
    };
    match structural_to_garch(&params) {
        Ok(theta) => {
            let arr = theta.as_array();
            ptr::copy_nonoverlapping(arr.as_ptr(), theta_out, 4);
            ArgiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Pre-averaging realized volatility for one day of tick log-prices (the
/// day's open must be included as the first entry). Writes the
/// total-variation estimate to `v_hat_out` and, when `c_varpi > 0`, the
/// jump-truncated estimate to `rv_out` (otherwise `rv_out` receives the total).
///
/// # Safety
/// `prices` must point to `len` readable doubles; the output pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn argi_prv_day(
    prices: *const f64,
    len: usize,
    c_varpi: f64,
    v_hat_out: *mut f64,
    rv_out: *mut f64,
) -> ArgiStatus {
    if prices.is_null() || v_hat_out.is_null() || rv_out.is_null() {
        return ArgiStatus::NullArgument;
    }
    let prices = slice::from_raw_parts(prices, len);
    let cfg = PrvConfig::default();
    match prv_total(prices, &cfg) {
        Ok(v) => {
            *v_hat_out = v;
            if c_varpi > 0.0 {
                match prv_integrated(prices, &cfg, c_varpi) {
                    Ok(rv) => *rv_out = rv,
                    Err(e) => return fail(e),
                }
            } else {
                *rv_out = v;
            }
            ArgiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Fits theta on a daily series. `rgi` freezes the leverage loading at zero.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn argi_fit(
    series: *const ArgiDailySeries,
    method: ArgiMethod,
    rgi: bool,
    out: *mut *mut ArgiFit,
) -> ArgiStatus {
    if series.is_null() || out.is_null() {
        return ArgiStatus::NullArgument;
    }
    let space = if rgi {
        ParamSpace::default().rgi()
    } else {
        ParamSpace::default()
    };
    let opts = FitOptions::default();
    let result = if method == ArgiMethod::AdjHuber {
        fit(Method::Huber, &(*series).inner, &space, &opts)
            .and_then(|base| bias_adjust(&base, &(*series).inner, &space))
    } else {
        fit(method.to_method(), &(*series).inner, &space, &opts)
    };
    match result {
        Ok(res) => {
            *out = Box::into_raw(Box::new(ArgiFit { inner: res, rgi }));
            ArgiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Frees a fit handle; `fit` may be NULL.
///
/// # Safety
/// `fit` must be a pointer returned by [`argi_fit`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn argi_fit_free(fit: *mut ArgiFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Copies the fitted theta into `theta_out[4]`.
///
/// # Safety
/// `fit` must be a live handle; `theta_out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn argi_fit_theta(fit: *const ArgiFit, theta_out: *mut f64) -> ArgiStatus {
    if fit.is_null() || theta_out.is_null() {
        return ArgiStatus::NullArgument;
    }
    let arr = (*fit).inner.theta_hat.as_array();
    ptr::copy_nonoverlapping(arr.as_ptr(), theta_out, 4);
    ArgiStatus::Ok
}

/// Whether the optimizer converged.
///
/// # Safety
/// `fit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn argi_fit_converged(fit: *const ArgiFit) -> bool {
    !fit.is_null() && (*fit).inner.converged
}

/// Final objective value of the fit.
///
/// # Safety
/// `fit` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn argi_fit_objective(fit: *const ArgiFit) -> f64 {
    if fit.is_null() {
        return f64::NAN;
    }
    (*fit).inner.objective_value
}

/// Truncation tuning of a Huber-family fit; fails with
/// `ARGI_STATUS_INVALID_ARGUMENT` for OLS/QMLE fits.
///
/// # Safety
/// `fit` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn argi_fit_tuning(
    fit: *const ArgiFit,
    b_hat_out: *mut f64,
    tau_n_out: *mut f64,
) -> ArgiStatus {
    if fit.is_null() || b_hat_out.is_null() || tau_n_out.is_null() {
        return ArgiStatus::NullArgument;
    }
    match &(*fit).inner.tuning {
        Some(t) => {
            *b_hat_out = t.b_hat;
            *tau_n_out = t.tau_n;
            ArgiStatus::Ok
        }
        None => fail(ArgiError::InvalidParameter(
            "tuning is only recorded for Huber-family fits".into(),
        )),
    }
}

/// One-day-ahead volatility forecast from a fit over a series (floored at the
/// published-forecast lower bound).
///
/// # Safety
/// `fit` and `series` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn argi_forecast_next(
    fit: *const ArgiFit,
    series: *const ArgiDailySeries,
    out: *mut f64,
) -> ArgiStatus {
    if fit.is_null() || series.is_null() || out.is_null() {
        return ArgiStatus::NullArgument;
    }
    let f = &(*fit).inner;
    let _ = (*fit).rgi;
    match forecast_next(&f.theta_hat, &(*series).inner, f.h1) {
        Ok(v) => {
            *out = v;
            ArgiStatus::Ok
        }
        Err(e) => fail(e),
    }
}
