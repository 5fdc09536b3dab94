//! HAR regression baseline: next-day realized volatility on daily, weekly
//! (5-day), and monthly (22-day) trailing means.

use crate::error::{ArgiError, Result};
use crate::filter::VOL_FLOOR;
use crate::linalg;

const WEEK: usize = 5;
const MONTH: usize = 22;
/// Rows with incomplete 22-day windows are dropped; a fit needs 30 usable rows.
const MIN_ROWS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarFit {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// Effective sample after the 22-day burn-in.
    pub n_used: usize,
    /// Set when the design was near-collinear and the minimum-norm solution
    /// was used.
    pub collinear: bool,
    /// Set when a forecast batch from this fit had its largest prediction
    /// replaced by the second largest.
    pub capped: bool,
}

fn trailing_mean(rv: &[f64], end: usize, len: usize) -> f64 {
    rv[end + 1 - len..=end].iter().sum::<f64>() / len as f64
}

/// Fits `RV_{d+1} = a + b1 RV_d + b2 RV_d^{(week)} + b3 RV_d^{(month)}` by
/// least squares on the normal equations; near-collinear designs fall back to
/// the minimum-norm solution.
pub fn har_fit(rv: &[f64]) -> Result<HarFit> {
    let n = rv.len();
    if n < MONTH + MIN_ROWS {
        return Err(ArgiError::InsufficientData(format!(
            "HAR needs at least {} observations, got {n}",
            MONTH + MIN_ROWS
        )));
    }
    if rv.iter().any(|v| !v.is_finite()) {
        return Err(ArgiError::InvalidParameter(
            "non-finite realized-volatility entry".into(),
        ));
    }
    // rows d = MONTH-1 .. n-2 predict rv[d+1]
    let rows: Vec<[f64; 4]> = (MONTH - 1..n - 1)
        .map(|d| {
            [
                1.0,
                rv[d],
                trailing_mean(rv, d, WEEK),
                trailing_mean(rv, d, MONTH),
            ]
        })
        .collect();
    let ys: Vec<f64> = (MONTH - 1..n - 1).map(|d| rv[d + 1]).collect();
    let n_used = rows.len();

    let mut gram = vec![vec![0.0f64; 4]; 4];
    let mut rhs = vec![0.0f64; 4];
    for (row, &y) in rows.iter().zip(&ys) {
        for j in 0..4 {
            rhs[j] += row[j] * y;
            for k in 0..4 {
                gram[j][k] += row[j] * row[k];
            }
        }
    }
    let cond = linalg::cond1(&gram);
    let (coef, collinear) = if cond.is_finite() && cond <= 1e10 {
        (linalg::solve(&gram, &rhs)?, false)
    } else {
        (linalg::solve_min_norm(&gram, &rhs, 1e-12), true)
    };
    Ok(HarFit {
        a: coef[0],
        b1: coef[1],
        b2: coef[2],
        b3: coef[3],
        n_used,
        collinear,
        capped: false,
    })
}

/// Next-day prediction from the tail of the series, floored at the
/// published-volatility lower bound.
pub fn har_forecast(fit: &HarFit, rv: &[f64]) -> Result<f64> {
    let n = rv.len();
    if n < MONTH {
        return Err(ArgiError::InsufficientData(format!(
            "HAR forecast needs at least {MONTH} observations, got {n}"
        )));
    }
    let d = n - 1;
    let pred = fit.a
        + fit.b1 * rv[d]
        + fit.b2 * trailing_mean(rv, d, WEEK)
        + fit.b3 * trailing_mean(rv, d, MONTH);
    Ok(pred.max(VOL_FLOOR))
}

/// The outlier cap applied per out-of-sample batch: the single largest
/// prediction is replaced by the second largest. Returns whether a cap
/// happened.
pub fn cap_largest(preds: &mut [f64]) -> bool {
    if preds.len() < 2 {
        return false;
    }
    let (mut max_i, mut max_v) = (0usize, f64::NEG_INFINITY);
    let mut second = f64::NEG_INFINITY;
    for (i, &p) in preds.iter().enumerate() {
        if p > max_v {
            second = max_v;
            max_v = p;
            max_i = i;
        } else if p > second {
            second = p;
        }
    }
    if second < max_v {
        preds[max_i] = second;
        true
    } else {
        false
    }
}
