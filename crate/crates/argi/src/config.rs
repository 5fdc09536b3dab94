//! Flat key-value run configuration with dotted sections, e.g.
//! `sim.n_days = 125`. Every key has a documented default; unknown keys and
//! out-of-range values fail with file/line context.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{ArgiError, Result};
use crate::estimate::{FitOptions, Method};
use crate::model::{ParamSpace, StructuralParams};
use crate::realized::PrvConfig;
use crate::simulate::SimConfig;
use crate::tail::TuningConfig;

/// Estimator labels used by the backtest and the study: the four methods on
/// the full model (`a_*`) and on the leverage-restricted one (`r_*`).
pub const MODEL_ESTIMATORS: [&str; 8] = [
    "a_ols", "a_hub", "a_adj", "a_qmle", "r_ols", "r_hub", "r_adj", "r_qmle",
];

/// Splits an estimator label into (rgi?, method).
pub fn parse_estimator(label: &str) -> Result<(bool, Method)> {
    let (rgi, rest) = match label.split_once('_') {
        Some(("a", rest)) => (false, rest),
        Some(("r", rest)) => (true, rest),
        _ => {
            return Err(ArgiError::Config(format!(
                "unknown estimator '{label}' (expected a_/r_ + ols|hub|adj|qmle, or har)"
            )))
        }
    };
    let method = match rest {
        "ols" => Method::Ols,
        "hub" => Method::Huber,
        "adj" => Method::AdjHuber,
        "qmle" => Method::Qmle,
        other => {
            return Err(ArgiError::Config(format!(
                "unknown estimator method '{other}' in '{label}'"
            )))
        }
    };
    Ok((rgi, method))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub overnight: bool,

    pub n_days: usize,
    pub m_all: usize,
    pub m_obs: usize,
    pub sim_reps: usize,

    pub structural: StructuralParams,
    /// Optional explicit theta override for study targets; derived from the
    /// structural parameters when absent.
    pub theta: [Option<f64>; 4],

    pub prv: PrvConfig,
    pub tuning: TuningConfig,
    pub space: ParamSpace,

    pub fit_methods: Vec<String>,
    pub max_iterations: usize,
    pub h1_override: Option<f64>,

    pub window: usize,
    pub backtest_estimators: Vec<String>,
    pub backtest_har: bool,

    pub study_n: Vec<usize>,
    pub study_m: Vec<usize>,
    pub study_reps: usize,

    pub hac_lags: Option<usize>,
    pub two_sided: bool,
    pub iid_se: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            threads: 0,
            overnight: false,
            n_days: 125,
            m_all: 23_400,
            m_obs: 390,
            sim_reps: 1,
            structural: StructuralParams::section4(),
            theta: [None; 4],
            prv: PrvConfig::default(),
            tuning: TuningConfig::default(),
            space: ParamSpace::default(),
            fit_methods: vec![
                "ols".into(),
                "huber".into(),
                "adjhuber".into(),
                "qmle".into(),
            ],
            max_iterations: 500,
            h1_override: None,
            window: 125,
            backtest_estimators: MODEL_ESTIMATORS.iter().map(|s| s.to_string()).collect(),
            backtest_har: true,
            study_n: vec![125],
            study_m: vec![390],
            study_reps: 100,
            hac_lags: None,
            two_sided: false,
            iid_se: false,
        }
    }
}

impl RunConfig {
    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iterations: self.max_iterations,
            h1: self.h1_override,
            tuning: self.tuning,
            ..FitOptions::default()
        }
    }

    pub fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            n_days: self.n_days,
            m_all: self.m_all,
            m_obs: self.m_obs,
            seed,
            params: self.structural,
        }
    }

    /// Full validation against the module preconditions.
    pub fn validate(&self) -> Result<()> {
        self.sim_config(self.seed).validate()?;
        self.prv.validate()?;
        self.tuning.validate()?;
        self.space.validate()?;
        if self.sim_reps == 0 || self.study_reps == 0 {
            return Err(ArgiError::InvalidParameter(
                "replication counts must be positive".into(),
            ));
        }
        if self.window < 17 {
            return Err(ArgiError::InvalidParameter(
                "backtest window must be at least 17 days (tuning needs k_n in [2, n))".into(),
            ));
        }
        for m in &self.fit_methods {
            Method::parse(m)?;
        }
        for label in &self.backtest_estimators {
            parse_estimator(label)?;
        }
        if self.study_n.is_empty() || self.study_m.is_empty() {
            return Err(ArgiError::InvalidParameter(
                "study.n_list and study.m_list must be non-empty".into(),
            ));
        }
        for &m in &self.study_m {
            if self.m_all % m != 0 {
                return Err(ArgiError::InvalidParameter(format!(
                    "study m={m} must divide sim.m_all={}",
                    self.m_all
                )));
            }
        }
        let set: BTreeSet<_> = self.theta.iter().map(|t| t.is_some()).collect();
        if set.len() > 1 {
            return Err(ArgiError::InvalidParameter(
                "theta.* overrides must be given for all four coordinates or none".into(),
            ));
        }
        Ok(())
    }

    /// Loads a config file over the defaults.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ArgiError::Parse {
                file: path.display().to_string(),
                line: lineno,
                message: "expected 'key = value'".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(key, value).map_err(|e| ArgiError::Parse {
                file: path.display().to_string(),
                line: lineno,
                message: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| ArgiError::Config(format!("{key}: {e}")))
        }
        fn boolean(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(ArgiError::Config(format!(
                    "{key}: expected true/false, got '{other}'"
                ))),
            }
        }
        fn list_usize(key: &str, value: &str) -> Result<Vec<usize>> {
            value
                .split(',')
                .map(|s| num::<usize>(key, s.trim()))
                .collect()
        }
        match key {
            "seed" => self.seed = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "overnight" => self.overnight = boolean(key, value)?,

            "sim.n_days" => self.n_days = num(key, value)?,
            "sim.m_all" => self.m_all = num(key, value)?,
            "sim.m_obs" => self.m_obs = num(key, value)?,
            "sim.reps" => self.sim_reps = num(key, value)?,

            "structural.mu" => self.structural.mu = num(key, value)?,
            "structural.omega1" => self.structural.omega1 = num(key, value)?,
            "structural.omega2" => self.structural.omega2 = num(key, value)?,
            "structural.gamma" => self.structural.gamma = num(key, value)?,
            "structural.alpha" => self.structural.alpha = num(key, value)?,
            "structural.beta" => self.structural.beta = num(key, value)?,
            "structural.nu" => self.structural.nu = num(key, value)?,
            "structural.noise_sd" => self.structural.noise_sd = num(key, value)?,
            "structural.x0" => self.structural.x0 = num(key, value)?,
            "structural.sigma0_sq" => self.structural.sigma0_sq = num(key, value)?,
            "jump.lambda" => self.structural.jump.intensity = num(key, value)?,
            "jump.c_j" => self.structural.jump.c_j = num(key, value)?,
            "jump.df" => self.structural.jump.df = num(key, value)?,

            "theta.omega_g" => self.theta[0] = Some(num(key, value)?),
            "theta.gamma" => self.theta[1] = Some(num(key, value)?),
            "theta.alpha_g" => self.theta[2] = Some(num(key, value)?),
            "theta.beta_g" => self.theta[3] = Some(num(key, value)?),

            "prv.bandwidth" => {
                let k: usize = num(key, value)?;
                self.prv.bandwidth = if k == 0 { None } else { Some(k) };
            }
            "prv.trunc_exponent" => self.prv.trunc_exponent = num(key, value)?,
            "prv.c_mult" => self.prv.c_trunc_multiplier = num(key, value)?,
            "prv.min_ticks" => self.prv.min_ticks = num(key, value)?,
            "prv.pooled_threshold" => self.prv.pooled_threshold = boolean(key, value)?,

            "tuning.c_b" => self.tuning.c_b = num(key, value)?,
            "tuning.c" => self.tuning.c_multiplier = num(key, value)?,

            "space.omega_g.min" => self.space.lower[0] = num(key, value)?,
            "space.omega_g.max" => self.space.upper[0] = num(key, value)?,
            "space.gamma.min" => self.space.lower[1] = num(key, value)?,
            "space.gamma.max" => self.space.upper[1] = num(key, value)?,
            "space.alpha_g.min" => self.space.lower[2] = num(key, value)?,
            "space.alpha_g.max" => self.space.upper[2] = num(key, value)?,
            "space.beta_g.min" => self.space.lower[3] = num(key, value)?,
            "space.beta_g.max" => self.space.upper[3] = num(key, value)?,
            "space.margin" => self.space.stationarity_margin = num(key, value)?,

            "fit.methods" => {
                self.fit_methods = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "fit.max_iterations" => self.max_iterations = num(key, value)?,
            "fit.h1" => {
                let v: f64 = num(key, value)?;
                self.h1_override = if v == 0.0 { None } else { Some(v) };
            }

            "backtest.window" => self.window = num(key, value)?,
            "backtest.estimators" => {
                let mut labels = Vec::new();
                let mut har = false;
                for tok in value.split(',') {
                    let tok = tok.trim();
                    if tok == "har" {
                        har = true;
                    } else {
                        labels.push(tok.to_string());
                    }
                }
                self.backtest_estimators = labels;
                self.backtest_har = har;
            }

            "study.n_list" => self.study_n = list_usize(key, value)?,
            "study.m_list" => self.study_m = list_usize(key, value)?,
            "study.reps" => self.study_reps = num(key, value)?,

            "eval.hac_lags" => {
                let v: usize = num(key, value)?;
                self.hac_lags = if v == 0 { None } else { Some(v) };
            }
            "eval.two_sided" => self.two_sided = boolean(key, value)?,
            "eval.iid_se" => self.iid_se = boolean(key, value)?,

            other => {
                return Err(ArgiError::Config(format!("unknown key '{other}'")));
            }
        }
        Ok(())
    }
}
