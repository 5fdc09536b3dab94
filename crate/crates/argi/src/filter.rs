//! The conditional-variance recursion
//! `h_i = omega_g + gamma h_{i-1} + beta_g RV_{i-1} - alpha_g r_{i-1}`,
//! evaluated together with its gradient and Hessian in theta, plus the
//! one-day-ahead forecast.
//!
//! Two floors play different roles: during estimation `h` is floored at
//! [`H_FLOOR`] so Huber residuals stay meaningful, while published forecasts
//! are floored at [`VOL_FLOOR`]. When the estimation floor binds, the gradient
//! and Hessian are zeroed for that step (subgradient choice).

use crate::error::{ArgiError, Result};
use crate::model::GarchParams;
use crate::realized::DailySeries;

/// Floor applied to the recursion during estimation.
pub const H_FLOOR: f64 = 1e-10;
/// Floor applied to published volatility forecasts.
pub const VOL_FLOOR: f64 = 1e-5;

/// Filter state for one day: the conditional variance, its gradient, and its
/// Hessian with respect to `(omega_g, gamma, alpha_g, beta_g)`.
#[derive(Debug, Clone, Copy)]
pub struct FilterState {
    pub h: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

impl FilterState {
    fn zeroed(h: f64) -> Self {
        FilterState {
            h,
            grad: [0.0; 4],
            hess: [[0.0; 4]; 4],
        }
    }
}

/// Filtered path over the sample plus the number of floor events.
#[derive(Debug, Clone)]
pub struct FilterPath {
    /// One state per day, aligned with the input series; the first entry is
    /// the initial value with zero derivatives.
    pub states: Vec<FilterState>,
    pub floor_events: usize,
}

/// Runs the recursion over the series, propagating the gradient
/// (`d h_i = source_i + gamma d h_{i-1}`) and the Hessian, whose only source
/// terms sit in the gamma row/column.
pub fn filter_path(theta: &GarchParams, data: &DailySeries, h1: f64) -> Result<FilterPath> {
    data.validate()?;
    let n = data.n_days();
    if n < 2 {
        return Err(ArgiError::InsufficientData(
            "filter needs at least 2 days".into(),
        ));
    }
    if !(h1 > 0.0) || !h1.is_finite() {
        return Err(ArgiError::Domain(format!("h1 must be positive, got {h1}")));
    }
    let mut states = Vec::with_capacity(n);
    states.push(FilterState::zeroed(h1));
    let mut floor_events = 0usize;

    for i in 1..n {
        let prev = states[i - 1];
        let rv = data.rv[i - 1];
        let r = data.ret[i - 1];
        let h_raw = theta.omega_g + theta.gamma * prev.h + theta.beta_g * rv - theta.alpha_g * r;
        if !h_raw.is_finite() {
            return Err(ArgiError::Estimation(format!(
                "conditional variance became non-finite on day {}",
                i + 1
            )));
        }
        if h_raw < H_FLOOR {
            floor_events += 1;
            states.push(FilterState::zeroed(H_FLOOR));
            continue;
        }
        let grad = [
            1.0 + theta.gamma * prev.grad[0],
            prev.h + theta.gamma * prev.grad[1],
            -r + theta.gamma * prev.grad[2],
            rv + theta.gamma * prev.grad[3],
        ];
        let mut hess = [[0.0; 4]; 4];
        for j in 0..4 {
            for k in 0..4 {
                hess[j][k] = theta.gamma * prev.hess[j][k];
            }
        }
        for j in 0..4 {
            hess[1][j] += prev.grad[j];
            hess[j][1] += prev.grad[j];
        }
        states.push(FilterState { h: h_raw, grad, hess });
    }
    Ok(FilterPath {
        states,
        floor_events,
    })
}

/// One-day-ahead forecast: one extra recursion step past the sample using the
/// last day's innovations, floored at [`VOL_FLOOR`].
pub fn forecast_next(theta: &GarchParams, data: &DailySeries, h1: f64) -> Result<f64> {
    let path = filter_path(theta, data, h1)?;
    let last = path.states.last().expect("non-empty path");
    let n = data.n_days();
    let h_next = theta.omega_g + theta.gamma * last.h + theta.beta_g * data.rv[n - 1]
        - theta.alpha_g * data.ret[n - 1];
    Ok(h_next.max(VOL_FLOOR))
}
