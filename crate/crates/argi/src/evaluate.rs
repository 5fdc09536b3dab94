//! Forecast-accuracy metrics, the Diebold-Mariano comparison with a
//! Bartlett-kernel HAC standard error, and the residual-persistence
//! diagnostics.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ArgiError, Result};

/// Per-estimator forecast losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mspe: f64,
    pub rmspe: f64,
    pub qlike: f64,
    /// Zero-target days excluded from the RMSPE, never silently dropped.
    pub rmspe_excluded: usize,
}

/// MSPE = mean (vol - target)^2, RMSPE = mean ((vol - target)/target)^2 with
/// zero targets excluded and counted, QLIKE = mean (log vol + target/vol).
pub fn metrics(vol: &[f64], target: &[f64]) -> Result<Metrics> {
    if vol.len() != target.len() || vol.is_empty() {
        return Err(ArgiError::InvalidParameter(
            "metrics need aligned non-empty series".into(),
        ));
    }
    if vol.iter().any(|&v| !(v > 0.0)) {
        return Err(ArgiError::Domain(
            "volatility forecasts must be positive (floored upstream)".into(),
        ));
    }
    if target.iter().any(|t| !t.is_finite()) {
        return Err(ArgiError::InvalidParameter("non-finite target".into()));
    }
    let n = vol.len() as f64;
    let mspe = vol
        .iter()
        .zip(target)
        .map(|(v, t)| (v - t) * (v - t))
        .sum::<f64>()
        / n;
    let qlike = vol
        .iter()
        .zip(target)
        .map(|(v, t)| v.ln() + t / v)
        .sum::<f64>()
        / n;
    let mut rmspe_sum = 0.0;
    let mut excluded = 0usize;
    for (v, t) in vol.iter().zip(target) {
        if *t == 0.0 {
            excluded += 1;
        } else {
            let rel = (v - t) / t;
            rmspe_sum += rel * rel;
        }
    }
    let used = vol.len() - excluded;
    if used == 0 {
        return Err(ArgiError::Degenerate(
            "all targets are zero: RMSPE undefined".into(),
        ));
    }
    Ok(Metrics {
        mspe,
        rmspe: rmspe_sum / used as f64,
        qlike,
        rmspe_excluded: excluded,
    })
}

/// Loss functions used for the pairwise comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mspe,
    Rmspe,
    Qlike,
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Mspe => "mspe",
            LossKind::Rmspe => "rmspe",
            LossKind::Qlike => "qlike",
        }
    }

    /// Per-day loss `f(vol, target)`.
    pub fn loss(&self, vol: f64, target: f64) -> f64 {
        match self {
            LossKind::Mspe => (vol - target) * (vol - target),
            LossKind::Rmspe => {
                let rel = (vol - target) / target;
                rel * rel
            }
            LossKind::Qlike => vol.ln() + target / vol,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DmOptions {
    /// Bartlett truncation lag; `None` selects `floor(n^{1/3})`.
    pub hac_lags: Option<usize>,
    /// Plain i.i.d. standard error instead of HAC.
    pub iid_se: bool,
    /// Two-sided p-value instead of the one-sided (lower-tail) default.
    pub two_sided: bool,
}

impl Default for DmOptions {
    fn default() -> Self {
        DmOptions {
            hac_lags: None,
            iid_se: false,
            two_sided: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
}

/// Diebold-Mariano statistic `Zbar / se(Zbar)` on the loss differential
/// `Z = loss1 - loss2`, with a Bartlett-kernel HAC estimate of the variance of
/// the mean. The default p-value is one-sided in the lower tail (estimator 1
/// better).
pub fn dm_test(loss1: &[f64], loss2: &[f64], opts: &DmOptions) -> Result<DmResult> {
    let n = loss1.len();
    if n != loss2.len() || n < 30 {
        return Err(ArgiError::InsufficientData(format!(
            "DM test needs aligned series of length >= 30, got {n} and {}",
            loss2.len()
        )));
    }
    let z: Vec<f64> = loss1.iter().zip(loss2).map(|(a, b)| a - b).collect();
    let mean = z.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = z.iter().map(|v| v - mean).collect();
    let gamma0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let lags = match opts.hac_lags {
        Some(l) => l,
        None => (n as f64).powf(1.0 / 3.0).floor() as usize,
    };
    let mut s = gamma0;
    if !opts.iid_se {
        for l in 1..=lags.min(n - 1) {
            let gl = centered[l..]
                .iter()
                .zip(&centered[..n - l])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64;
            s += 2.0 * (1.0 - l as f64 / (lags as f64 + 1.0)) * gl;
        }
    }
    let var_mean = s / n as f64;
    if !(var_mean > 0.0) {
        return Err(ArgiError::Degenerate(
            "no difference: loss differential has zero variance".into(),
        ));
    }
    let statistic = mean / var_mean.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_value = if opts.two_sided {
        2.0 * (1.0 - normal.cdf(statistic.abs()))
    } else {
        normal.cdf(statistic)
    };
    Ok(DmResult {
        statistic,
        p_value,
        lags_used: if opts.iid_se { 0 } else { lags },
    })
}

#[derive(Debug, Clone)]
pub struct PersistenceResult {
    pub intercept: f64,
    pub slope: f64,
    /// Autocorrelations at lags 0..=30 (lag 0 is 1 by construction).
    pub acf: Vec<f64>,
    /// max |acf| over lags 1..=30.
    pub max_abs_acf: f64,
    /// Exact fit left zero residuals; the ACF is reported as all-zero.
    pub degenerate: bool,
}

/// Regresses `v_hat = a + b * vol + e` and reports the residual
/// autocorrelations at lags 1..=30 (biased estimator: normalized by the lag-0
/// sum over the full sample).
pub fn persistence_regression(v_hat: &[f64], vol: &[f64]) -> Result<PersistenceResult> {
    let n = v_hat.len();
    if n != vol.len() || n < 60 {
        return Err(ArgiError::InsufficientData(format!(
            "persistence regression needs aligned series of length >= 60, got {n}"
        )));
    }
    let xm = vol.iter().sum::<f64>() / n as f64;
    let ym = v_hat.iter().sum::<f64>() / n as f64;
    let sxx: f64 = vol.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(ArgiError::Degenerate(
            "zero-variance forecasts in the persistence regression".into(),
        ));
    }
    let sxy: f64 = vol
        .iter()
        .zip(v_hat)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let resid: Vec<f64> = v_hat
        .iter()
        .zip(vol)
        .map(|(y, x)| y - intercept - slope * x)
        .collect();
    let rm = resid.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = resid.iter().map(|r| r - rm).collect();
    let denom: f64 = centered.iter().map(|r| r * r).sum();
    let max_lag = 30usize;
    let mut acf = Vec::with_capacity(max_lag + 1);
    let degenerate = denom <= 1e-24 * n as f64;
    if degenerate {
        acf = vec![0.0; max_lag + 1];
    } else {
        acf.push(1.0);
        for l in 1..=max_lag {
            let num: f64 = if l < n {
                centered[l..]
                    .iter()
                    .zip(&centered[..n - l])
                    .map(|(a, b)| a * b)
                    .sum()
            } else {
                0.0
            };
            acf.push(num / denom);
        }
    }
    let max_abs_acf = acf[1..].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    Ok(PersistenceResult {
        intercept,
        slope,
        acf,
        max_abs_acf,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn perfect_forecast_metrics() {
        let target = vec![0.5, 1.0, 2.0];
        let m = metrics(&target, &target).unwrap();
        assert_eq!(m.mspe, 0.0);
        assert_eq!(m.rmspe, 0.0);
        let want = (0.5f64.ln() + 1.0 + 0.0 + 1.0 + 2.0f64.ln() + 1.0) / 3.0;
        assert!((m.qlike - want).abs() < 1e-15);
    }

    #[test]
    fn hand_arithmetic_single_day() {
        let m = metrics(&[2.0], &[1.0]).unwrap();
        assert!((m.mspe - 1.0).abs() < 1e-15);
        assert!((m.rmspe - 1.0).abs() < 1e-15);
        assert!((m.qlike - (2.0f64.ln() + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn metrics_match_independent_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vol: Vec<f64> = (0..200).map(|_| 0.5 + rng.random::<f64>()).collect();
        let target: Vec<f64> = (0..200).map(|_| 0.5 + rng.random::<f64>()).collect();
        let m = metrics(&vol, &target).unwrap();
        // oracle coded independently: accumulate in reverse order with
        // explicit indexing
        let n = vol.len();
        let mut mspe = 0.0;
        let mut rmspe = 0.0;
        let mut qlike = 0.0;
        for i in (0..n).rev() {
            let d = vol[i] - target[i];
            mspe += d * d / n as f64;
            let rel = d / target[i];
            rmspe += rel * rel / n as f64;
            qlike += (vol[i].ln() + target[i] / vol[i]) / n as f64;
        }
        assert!((m.mspe - mspe).abs() < 1e-12);
        assert!((m.rmspe - rmspe).abs() < 1e-12);
        assert!((m.qlike - qlike).abs() < 1e-12);
    }

    #[test]
    fn zero_targets_counted_or_rejected() {
        let m = metrics(&[1.0, 1.0, 1.0], &[0.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.rmspe_excluded, 1);
        assert!(metrics(&[1.0, 1.0], &[0.0, 0.0]).is_err());
        // mspe/qlike permutation invariance
        let a = metrics(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap();
        let b = metrics(&[3.0, 1.0, 2.0], &[3.5, 1.5, 2.5]).unwrap();
        assert!((a.mspe - b.mspe).abs() < 1e-15);
        assert!((a.qlike - b.qlike).abs() < 1e-15);
    }

    #[test]
    fn dm_identical_losses_degenerate() {
        let l = vec![1.0; 50];
        let err = dm_test(&l, &l, &DmOptions::default()).unwrap_err();
        assert!(matches!(err, ArgiError::Degenerate(_)));
    }

    #[test]
    fn dm_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let ab = dm_test(&a, &b, &DmOptions::default()).unwrap();
        let ba = dm_test(&b, &a, &DmOptions::default()).unwrap();
        assert!((ab.statistic + ba.statistic).abs() < 1e-12);
    }

    #[test]
    fn dm_size_on_iid_differentials() {
        let mut rejections = 0;
        let reps = 1000;
        let n = 1000;
        for rep in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(500_000 + rep);
            let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let zero = vec![0.0; n];
            let res = dm_test(&z, &zero, &DmOptions::default()).unwrap();
            if res.p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!((0.03..=0.07).contains(&rate), "size {rate}");
    }

    #[test]
    fn dm_power_on_shifted_differentials() {
        let mut hits = 0;
        let seeds = 200;
        for s in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(900_000 + s);
            let z: Vec<f64> = (0..200)
                .map(|_| rng.sample::<f64, _>(StandardNormal) - 0.5)
                .collect();
            let zero = vec![0.0; 200];
            let res = dm_test(&z, &zero, &DmOptions::default()).unwrap();
            if res.statistic < 0.0 && res.p_value < 0.05 {
                hits += 1;
            }
        }
        assert!(hits * 100 >= 95 * seeds, "{hits}/{seeds}");
    }

    #[test]
    fn persistence_white_noise_band() {
        let n = 500;
        let mut inside = 0;
        let seeds = 100;
        for s in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(50 + s);
            let vol: Vec<f64> = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
            let v_hat: Vec<f64> = vol
                .iter()
                .map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let res = persistence_regression(&v_hat, &vol).unwrap();
            if res.max_abs_acf < 3.0 / (n as f64).sqrt() {
                inside += 1;
            }
        }
        assert!(inside * 100 >= 90 * seeds, "{inside}/{seeds} inside the band");
    }

    #[test]
    fn persistence_exact_fit_degenerate() {
        let vol: Vec<f64> = (0..80).map(|i| 1.0 + i as f64 * 0.01).collect();
        let v_hat: Vec<f64> = vol.iter().map(|v| 0.2 + 1.5 * v).collect();
        let res = persistence_regression(&v_hat, &vol).unwrap();
        assert!(res.degenerate);
        assert!(res.acf.iter().all(|&a| a == 0.0));
        assert_eq!(res.max_abs_acf, 0.0);
        assert!((res.slope - 1.5).abs() < 1e-10);
    }

    #[test]
    fn persistence_ar1_residuals_detected() {
        let n = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let vol: Vec<f64> = (0..n).map(|_| 1.0 + rng.random::<f64>()).collect();
        let mut e = 0.0;
        let v_hat: Vec<f64> = vol
            .iter()
            .map(|v| {
                e = 0.5 * e + rng.sample::<f64, _>(StandardNormal);
                v + 0.1 * e
            })
            .collect();
        let res = persistence_regression(&v_hat, &vol).unwrap();
        assert!((res.acf[1] - 0.5).abs() < 0.1, "lag-1 acf {}", res.acf[1]);
        assert!((res.acf[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn persistence_rejects_bad_input() {
        let short = vec![1.0; 10];
        assert!(persistence_regression(&short, &short).is_err());
        let v = vec![1.0; 80];
        let flat = vec![2.0; 80];
        assert!(persistence_regression(&v, &flat).is_err());
    }
}
