//! Monte-Carlo study harness: per (n, m, replication) simulate a path,
//! estimate the daily series, fit the requested estimators on the full and
//! leverage-restricted spaces, forecast one day ahead, and compare against the
//! true forecast target. Replications run in a worker pool with derived
//! per-replication seeds; results are independent of thread count.

use rayon::prelude::*;

use crate::config::{parse_estimator, RunConfig};
use crate::derive_seed;
use crate::error::{ArgiError, Result};
use crate::estimate::{fit, FitOptions};
use crate::filter::{forecast_next, VOL_FLOOR};
use crate::model::{structural_to_garch, GarchParams};
use crate::realized::build_daily_series;
use crate::simulate::{simulate, thin_ticks, SimConfig};

/// Label of the previous-day realized-volatility benchmark.
pub const PRV_BENCHMARK: &str = "prv";

#[derive(Debug, Clone)]
pub struct EstimateRow {
    pub estimator: String,
    pub theta: [f64; 4],
    pub converged: bool,
    pub forecast: f64,
}

#[derive(Debug, Clone)]
pub struct StudyRecord {
    pub n: usize,
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    pub estimates: Vec<EstimateRow>,
    /// Previous-day PRV benchmark forecast.
    pub prv_forecast: f64,
    pub true_h_next: f64,
    /// Present when the replication failed and is excluded from aggregates.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub theta0: GarchParams,
    pub records: Vec<StudyRecord>,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummaryRow {
    pub n: usize,
    pub m: usize,
    pub estimator: String,
    pub param: &'static str,
    pub bias2: f64,
    pub variance: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSummaryRow {
    pub n: usize,
    pub m: usize,
    pub estimator: String,
    pub mspe: f64,
    pub qlike: f64,
}

fn run_cell(
    cfg: &RunConfig,
    estimators: &[String],
    n: usize,
    m: usize,
    rep: usize,
    seed: u64,
    ticks: &crate::simulate::TickSeries,
    true_h_next: f64,
) -> Result<StudyRecord> {
    let thinned = thin_ticks(ticks, m)?;
    let series = build_daily_series(&thinned, &cfg.prv, cfg.overnight)?;
    let opts: FitOptions = cfg.fit_options();
    let mut estimates = Vec::with_capacity(estimators.len());
    for label in estimators {
        let (rgi, method) = parse_estimator(label)?;
        let space = if rgi { cfg.space.rgi() } else { cfg.space };
        let res = fit(method, &series, &space, &opts)
            .map_err(|e| ArgiError::Estimation(format!("{label}: {e}")))?;
        let forecast = forecast_next(&res.theta_hat, &series, res.h1)?;
        estimates.push(EstimateRow {
            estimator: label.clone(),
            theta: res.theta_hat.as_array(),
            converged: res.converged,
            forecast,
        });
    }
    let prv_forecast = series.v_hat[series.n_days() - 1].max(VOL_FLOOR);
    Ok(StudyRecord {
        n,
        m,
        rep,
        seed,
        estimates,
        prv_forecast,
        true_h_next,
        error: None,
    })
}

/// Runs the full grid. `estimators` take the backtest labels
/// (`a_ols`, ..., `r_qmle`); the PRV benchmark is always recorded.
pub fn run_study(cfg: &RunConfig, estimators: &[String]) -> Result<StudyResult> {
    cfg.validate()?;
    let theta0 = match cfg.theta {
        [Some(o), Some(g), Some(a), Some(b)] => GarchParams::from_array([o, g, a, b]),
        _ => structural_to_garch(&cfg.structural)?,
    };
    for label in estimators {
        parse_estimator(label)?;
    }
    // one simulation per (n, rep), reused across the m grid
    let mut tasks = Vec::new();
    for (n_idx, &n) in cfg.study_n.iter().enumerate() {
        for rep in 0..cfg.study_reps {
            tasks.push((n_idx, n, rep));
        }
    }
    let records: Vec<Vec<StudyRecord>> = tasks
        .par_iter()
        .map(|&(n_idx, n, rep)| {
            let seed = derive_seed(cfg.seed, ((n_idx as u64) << 40) | rep as u64);
            let sim_cfg = SimConfig {
                n_days: n,
                m_all: cfg.m_all,
                m_obs: cfg.m_all,
                seed,
                params: cfg.structural,
            };
            let sim = match simulate(&sim_cfg) {
                Ok(s) => s,
                Err(e) => {
                    return cfg
                        .study_m
                        .iter()
                        .map(|&m| StudyRecord {
                            n,
                            m,
                            rep,
                            seed,
                            estimates: vec![],
                            prv_forecast: VOL_FLOOR,
                            true_h_next: f64::NAN,
                            error: Some(e.to_string()),
                        })
                        .collect();
                }
            };
            cfg.study_m
                .iter()
                .map(|&m| {
                    run_cell(
                        cfg,
                        estimators,
                        n,
                        m,
                        rep,
                        seed,
                        &sim.ticks,
                        sim.true_h_next,
                    )
                    .unwrap_or_else(|e| StudyRecord {
                        n,
                        m,
                        rep,
                        seed,
                        estimates: vec![],
                        prv_forecast: VOL_FLOOR,
                        true_h_next: sim.true_h_next,
                        error: Some(e.to_string()),
                    })
                })
                .collect()
        })
        .collect();
    let records: Vec<StudyRecord> = records.into_iter().flatten().collect();
    let excluded = records.iter().filter(|r| r.error.is_some()).count();
    Ok(StudyResult {
        theta0,
        records,
        excluded,
    })
}

impl StudyResult {
    /// Per-parameter squared bias, variance, and MSE across clean
    /// replications, in long format. `mse` is the mean squared error computed
    /// directly, so `bias2 + variance = mse` holds to rounding.
    pub fn param_summary(&self) -> Vec<ParamSummaryRow> {
        let mut rows = Vec::new();
        let cells = self.cells();
        let t0 = self.theta0.as_array();
        for (n, m) in cells {
            let recs: Vec<&StudyRecord> = self
                .records
                .iter()
                .filter(|r| r.n == n && r.m == m && r.error.is_none())
                .collect();
            if recs.is_empty() {
                continue;
            }
            let labels: Vec<String> = recs[0]
                .estimates
                .iter()
                .map(|e| e.estimator.clone())
                .collect();
            for label in &labels {
                for (p, pname) in GarchParams::NAMES.iter().enumerate() {
                    let errs: Vec<f64> = recs
                        .iter()
                        .map(|r| {
                            let est = r
                                .estimates
                                .iter()
                                .find(|e| &e.estimator == label)
                                .expect("aligned estimator sets");
                            est.theta[p] - t0[p]
                        })
                        .collect();
                    let count = errs.len() as f64;
                    let mean = errs.iter().sum::<f64>() / count;
                    let mse = errs.iter().map(|e| e * e).sum::<f64>() / count;
                    let bias2 = mean * mean;
                    let variance = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / count;
                    rows.push(ParamSummaryRow {
                        n,
                        m,
                        estimator: label.clone(),
                        param: pname,
                        bias2,
                        variance,
                        mse,
                    });
                }
            }
        }
        rows
    }

    /// Forecast MSPE and QLIKE against the true next-day conditional variance,
    /// per estimator (including the PRV benchmark).
    pub fn forecast_summary(&self) -> Vec<ForecastSummaryRow> {
        let mut rows = Vec::new();
        for (n, m) in self.cells() {
            let recs: Vec<&StudyRecord> = self
                .records
                .iter()
                .filter(|r| r.n == n && r.m == m && r.error.is_none())
                .collect();
            if recs.is_empty() {
                continue;
            }
            let mut labels: Vec<String> = recs[0]
                .estimates
                .iter()
                .map(|e| e.estimator.clone())
                .collect();
            labels.push(PRV_BENCHMARK.to_string());
            for label in &labels {
                let pairs: Vec<(f64, f64)> = recs
                    .iter()
                    .map(|r| {
                        let vol = if label == PRV_BENCHMARK {
                            r.prv_forecast
                        } else {
                            r.estimates
                                .iter()
                                .find(|e| &e.estimator == label)
                                .expect("aligned estimator sets")
                                .forecast
                        };
                        (vol, r.true_h_next)
                    })
                    .collect();
                let count = pairs.len() as f64;
                let mspe = pairs.iter().map(|(v, t)| (v - t) * (v - t)).sum::<f64>() / count;
                let qlike = pairs.iter().map(|(v, t)| v.ln() + t / v).sum::<f64>() / count;
                rows.push(ForecastSummaryRow {
                    n,
                    m,
                    estimator: label.clone(),
                    mspe,
                    qlike,
                });
            }
        }
        rows
    }

    fn cells(&self) -> Vec<(usize, usize)> {
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for r in &self.records {
            if !cells.contains(&(r.n, r.m)) {
                cells.push((r.n, r.m));
            }
        }
        cells
    }
}
