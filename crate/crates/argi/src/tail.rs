//! Hill tail-index estimation and adaptive selection of the Huber truncation
//! level `tau_n = c_tau * n^{1/b}`.

use crate::error::{ArgiError, Result};

#[derive(Debug, Clone, Copy)]
pub struct TuningConfig {
    /// Lower clamp for the tail index estimate.
    pub c_b: f64,
    /// Constant `c` in the threshold rule `c_tau = (c/n) sum |V_i - Vbar|^b`.
    pub c_multiplier: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            c_b: 1.1,
            c_multiplier: 0.2,
        }
    }
}

impl TuningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_b > 1.0 && self.c_b <= 2.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "c_b must lie in (1, 2], got {}",
                self.c_b
            )));
        }
        if !(self.c_multiplier > 0.0) {
            return Err(ArgiError::InvalidParameter(format!(
                "threshold multiplier must be > 0, got {}",
                self.c_multiplier
            )));
        }
        Ok(())
    }
}

/// Order-statistic count `k_n = floor(4 sqrt(n))`.
pub fn k_rule(n: usize) -> usize {
    (4.0 * (n as f64).sqrt()).floor() as usize
}

/// Selected truncation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningRecord {
    /// Raw Hill estimate.
    pub upsilon_hat: f64,
    /// Tail index clamped into `[c_b, 2]`.
    pub b_hat: f64,
    /// Threshold constant.
    pub c_tau: f64,
    /// Huber truncation level `c_tau * n^{1/b_hat}`.
    pub tau_n: f64,
}

/// Hill's estimator on the top `k_n` order statistics:
/// the reciprocal mean of `log V_(n-i) - log V_(n-k_n+1)`, `i = 0..k_n-1`.
pub fn hill_estimate(values: &[f64], k_n: usize) -> Result<f64> {
    let n = values.len();
    if k_n < 2 || n <= k_n {
        return Err(ArgiError::InsufficientData(format!(
            "hill estimator needs n > k_n >= 2, got n={n} k_n={k_n}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let anchor = sorted[n - k_n]; // the k_n-th largest, V_(n-k_n+1)
    if !(anchor > 0.0) {
        return Err(ArgiError::Domain(format!(
            "top {k_n} order statistics must be strictly positive, anchor = {anchor}"
        )));
    }
    let log_anchor = anchor.ln();
    let sum: f64 = sorted[n - k_n..].iter().map(|v| v.ln() - log_anchor).sum();
    if sum <= 0.0 {
        return Err(ArgiError::Degenerate(
            "zero log-spread in the top order statistics".into(),
        ));
    }
    Ok(k_n as f64 / sum)
}

/// Estimates the tail index, clamps it into `[c_b, 2]`, and derives the
/// adaptive Huber truncation level from the absolute central moments.
pub fn select_tuning(values: &[f64], cfg: &TuningConfig) -> Result<TuningRecord> {
    cfg.validate()?;
    let n = values.len();
    let k_n = k_rule(n);
    let upsilon_hat = hill_estimate(values, k_n)?;
    let b_hat = upsilon_hat.clamp(cfg.c_b, 2.0);
    let mean = values.iter().sum::<f64>() / n as f64;
    let c_tau = cfg.c_multiplier
        * values
            .iter()
            .map(|v| (v - mean).abs().powf(b_hat))
            .sum::<f64>()
        / n as f64;
    if !(c_tau > 0.0) {
        return Err(ArgiError::Degenerate(
            "constant series: threshold constant is zero".into(),
        ));
    }
    let tau_n = c_tau * (n as f64).powf(1.0 / b_hat);
    Ok(TuningRecord {
        upsilon_hat,
        b_hat,
        c_tau,
        tau_n,
    })
}
