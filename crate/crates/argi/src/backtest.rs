//! Rolling-window backtest: for each out-of-sample day, re-tune and re-fit the
//! requested estimators on the trailing window, forecast one day ahead, and
//! evaluate against the realized total variation. Emits the loss table, the
//! pairwise comparisons against the reference estimators, and the
//! residual-persistence diagnostics.

use rayon::prelude::*;

use crate::config::{parse_estimator, RunConfig};
use crate::error::{ArgiError, Result};
use crate::estimate::fit;
use crate::evaluate::{
    dm_test, metrics, persistence_regression, DmOptions, DmResult, LossKind, Metrics,
    PersistenceResult,
};
use crate::filter::{forecast_next, VOL_FLOOR};
use crate::realized::{build_daily_series, DailySeries};
use crate::simulate::TickSeries;
use crate::tail::{select_tuning, TuningRecord};

pub const HAR_LABEL: &str = "har";

#[derive(Debug, Clone)]
pub struct ForecastRow {
    /// 1-based day index of the forecast target.
    pub day: usize,
    /// Realized total variation of the target day.
    pub target: f64,
    /// Forecasts aligned with `BacktestResult::estimators`.
    pub vols: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum DmCell {
    Stat(DmResult),
    /// Degenerate comparison (identical losses) or reference itself.
    NoDifference,
}

#[derive(Debug, Clone)]
pub struct BacktestResult {
    /// Estimator labels in output order (models first, HAR last when enabled).
    pub estimators: Vec<String>,
    pub rows: Vec<ForecastRow>,
    pub metrics: Vec<(String, Metrics)>,
    /// DM of every estimator against `a_hub` under the MSPE and RMSPE losses.
    pub dm_mspe: Vec<(String, DmCell)>,
    pub dm_rmspe: Vec<(String, DmCell)>,
    /// DM against `a_qmle` under QLIKE.
    pub dm_qlike: Vec<(String, DmCell)>,
    pub persistence: Vec<(String, PersistenceResult)>,
    /// (day, reason) for skipped out-of-sample days.
    pub skipped: Vec<(usize, String)>,
    /// Per-window truncation tuning, aligned with `rows`.
    pub tuning: Vec<(usize, TuningRecord)>,
    /// Zero-target days removed from the RMSPE loss series.
    pub rmspe_zero_days: usize,
    pub har_capped: bool,
}

fn day_task(
    cfg: &RunConfig,
    series: &DailySeries,
    labels: &[String],
    day: usize, // 0-based target day
) -> Result<(Vec<f64>, TuningRecord)> {
    let window = series.window(day - cfg.window, day);
    let tuning = select_tuning(&window.v_hat, &cfg.tuning)?;
    let opts = cfg.fit_options();
    let mut vols = Vec::with_capacity(labels.len());
    for label in labels {
        if label == HAR_LABEL {
            let fit_res = crate::baselines::har_fit(&window.rv)?;
            vols.push(crate::baselines::har_forecast(&fit_res, &window.rv)?);
            continue;
        }
        let (rgi, method) = parse_estimator(label)?;
        let space = if rgi { cfg.space.rgi() } else { cfg.space };
        let res = fit(method, &window, &space, &opts)
            .map_err(|e| ArgiError::Estimation(format!("{label}: {e}")))?;
        let vol = forecast_next(&res.theta_hat, &window, res.h1)?;
        vols.push(vol.max(VOL_FLOOR));
    }
    Ok((vols, tuning))
}

/// Runs the rolling backtest over a tick dataset.
pub fn run_backtest(ticks: &TickSeries, cfg: &RunConfig) -> Result<BacktestResult> {
    let mut labels: Vec<String> = cfg.backtest_estimators.clone();
    if cfg.backtest_har {
        labels.push(HAR_LABEL.to_string());
    }
    if labels.is_empty() {
        return Err(ArgiError::Config("no estimators requested".into()));
    }
    let series = build_daily_series(ticks, &cfg.prv, cfg.overnight)?;
    let n = series.n_days();
    let window = cfg.window;
    if n <= window {
        return Err(ArgiError::InsufficientData(format!(
            "need more than window={window} days, got {n}"
        )));
    }
    if cfg.backtest_har && window < 52 {
        return Err(ArgiError::InsufficientData(
            "HAR needs a window of at least 52 days".into(),
        ));
    }

    let targets: Vec<usize> = (window..n).collect();
    let outcomes: Vec<(usize, Result<(Vec<f64>, TuningRecord)>)> = targets
        .par_iter()
        .map(|&day| (day, day_task(cfg, &series, &labels, day)))
        .collect();

    let mut rows = Vec::new();
    let mut tuning = Vec::new();
    let mut skipped = Vec::new();
    for (day, outcome) in outcomes {
        match outcome {
            Ok((vols, tune)) => {
                rows.push(ForecastRow {
                    day: day + 1,
                    target: series.v_hat[day],
                    vols,
                });
                tuning.push((day + 1, tune));
            }
            Err(e) => skipped.push((day + 1, e.to_string())),
        }
    }
    if rows.len() < 30 {
        return Err(ArgiError::InsufficientData(format!(
            "only {} usable out-of-sample days",
            rows.len()
        )));
    }

    // HAR outlier cap per out-of-sample batch
    let mut har_capped = false;
    if let Some(har_idx) = labels.iter().position(|l| l == HAR_LABEL) {
        let mut preds: Vec<f64> = rows.iter().map(|r| r.vols[har_idx]).collect();
        har_capped = crate::baselines::cap_largest(&mut preds);
        for (row, p) in rows.iter_mut().zip(preds) {
            row.vols[har_idx] = p;
        }
    }

    let targets: Vec<f64> = rows.iter().map(|r| r.target).collect();
    let mut metric_rows = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let vols: Vec<f64> = rows.iter().map(|r| r.vols[i]).collect();
        metric_rows.push((label.clone(), metrics(&vols, &targets)?));
    }

    let dm_opts = DmOptions {
        hac_lags: cfg.hac_lags,
        iid_se: cfg.iid_se,
        two_sided: cfg.two_sided,
    };
    let rmspe_zero_days = targets.iter().filter(|&&t| t == 0.0).count();
    let loss_series = |label_idx: usize, kind: LossKind| -> Vec<f64> {
        rows.iter()
            .filter(|r| kind != LossKind::Rmspe || r.target != 0.0)
            .map(|r| kind.loss(r.vols[label_idx], r.target))
            .collect()
    };
    let dm_table = |reference: &str, kind: LossKind| -> Vec<(String, DmCell)> {
        let Some(ref_idx) = labels.iter().position(|l| l == reference) else {
            return Vec::new();
        };
        let ref_losses = loss_series(ref_idx, kind);
        labels
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != ref_idx)
            .map(|(i, label)| {
                let cell = match dm_test(&ref_losses, &loss_series(i, kind), &dm_opts) {
                    Ok(r) => DmCell::Stat(r),
                    Err(ArgiError::Degenerate(_)) => DmCell::NoDifference,
                    Err(_) => DmCell::NoDifference,
                };
                (label.clone(), cell)
            })
            .collect()
    };
    let dm_mspe = dm_table("a_hub", LossKind::Mspe);
    let dm_rmspe = dm_table("a_hub", LossKind::Rmspe);
    let dm_qlike = dm_table("a_qmle", LossKind::Qlike);

    let mut persistence = Vec::new();
    if rows.len() >= 60 {
        for (i, label) in labels.iter().enumerate() {
            let vols: Vec<f64> = rows.iter().map(|r| r.vols[i]).collect();
            match persistence_regression(&targets, &vols) {
                Ok(p) => persistence.push((label.clone(), p)),
                Err(e) => skipped.push((0, format!("persistence {label}: {e}"))),
            }
        }
    }

    Ok(BacktestResult {
        estimators: labels,
        rows,
        metrics: metric_rows,
        dm_mspe,
        dm_rmspe,
        dm_qlike,
        persistence,
        skipped,
        tuning,
        rmspe_zero_days,
        har_capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StructuralParams;
    use crate::simulate::{simulate, SimConfig};

    fn small_backtest_config() -> RunConfig {
        RunConfig {
            window: 60,
            backtest_estimators: vec!["a_hub".into(), "a_qmle".into(), "r_hub".into()],
            backtest_har: true,
            ..RunConfig::default()
        }
    }

    fn sim_ticks(n_days: usize, seed: u64) -> TickSeries {
        let cfg = SimConfig {
            n_days,
            m_all: 390,
            m_obs: 78,
            seed,
            params: StructuralParams::section4(),
        };
        simulate(&cfg).unwrap().ticks
    }

    #[test]
    fn backtest_row_bookkeeping() {
        let ticks = sim_ticks(160, 42);
        let cfg = small_backtest_config();
        let res = run_backtest(&ticks, &cfg).unwrap();
        assert_eq!(res.rows.len() + res.skipped.len(), 160 - 60);
        assert_eq!(res.estimators, vec!["a_hub", "a_qmle", "r_hub", "har"]);
        assert_eq!(res.metrics.len(), 4);
        // DM tables exclude the reference itself
        assert_eq!(res.dm_mspe.len(), 3);
        assert!(res.dm_mspe.iter().all(|(l, _)| l != "a_hub"));
        assert_eq!(res.dm_qlike.len(), 3);
        assert!(res.dm_qlike.iter().all(|(l, _)| l != "a_qmle"));
        // persistence table covers every estimator (rows >= 60... here 100)
        assert_eq!(res.persistence.len(), 4);
        // per-window tuning recorded per usable day
        assert_eq!(res.tuning.len(), res.rows.len());
    }

    #[test]
    fn backtest_is_deterministic() {
        let ticks = sim_ticks(140, 7);
        let cfg = RunConfig {
            backtest_estimators: vec!["a_ols".into()],
            backtest_har: false,
            window: 60,
            ..RunConfig::default()
        };
        let a = run_backtest(&ticks, &cfg).unwrap();
        let b = run_backtest(&ticks, &cfg).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.vols, rb.vols);
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run_backtest(&ticks, &cfg).unwrap());
        for (ra, rc) in a.rows.iter().zip(&c.rows) {
            assert_eq!(ra.vols, rc.vols);
        }
    }

    #[test]
    fn too_short_dataset_rejected() {
        let ticks = sim_ticks(50, 3);
        let cfg = small_backtest_config();
        assert!(run_backtest(&ticks, &cfg).is_err());
    }
}
