//! `argi` — simulate ARGI sample paths, estimate realized volatility from
//! tick data, fit the model by OLS/Huber/Adjusted-Huber/QMLE, and run the
//! Monte-Carlo study and rolling-window backtest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use argi::backtest::{run_backtest, BacktestResult, DmCell};
use argi::config::RunConfig;
use argi::error::{ArgiError, Result};
use argi::estimate::{bias_adjust, fit, Method};
use argi::io;
use argi::model::structural_to_garch;
use argi::realized::build_daily_series;
use argi::simulate::{simulate, simulate_with_trace, SimConfig};
use argi::study::{run_study, StudyResult};
use argi::derive_seed;

#[derive(Parser)]
#[command(name = "argi", version, about = "Asymmetric realized GARCH-Ito volatility modeling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base RNG seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides the config file.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Add squared close-to-open returns to the realized estimators.
    #[arg(long)]
    overnight: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate tick datasets plus per-day ground truth.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the fine-grid spot-variance trace per replication.
        #[arg(long)]
        spot_trace: bool,
    },
    /// Compute the daily realized series (V_hat, RV, returns) from ticks.
    Rv {
        #[command(flatten)]
        common: Common,
        /// Tick CSV file.
        #[arg(long)]
        ticks: PathBuf,
    },
    /// Fit the model on a daily CSV by the configured methods.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Daily CSV file (day,v_hat,rv,ret).
        #[arg(long)]
        daily: PathBuf,
    },
    /// Rolling-window out-of-sample evaluation on a tick dataset.
    Backtest {
        #[command(flatten)]
        common: Common,
        /// Tick CSV file.
        #[arg(long)]
        ticks: PathBuf,
    },
    /// Monte-Carlo study over the (n, m) grid.
    Study {
        #[command(flatten)]
        common: Common,
    },
    /// Summarize result files from an output directory.
    Report {
        /// Directory holding fit/backtest/study outputs.
        #[arg(long, default_value = "out")]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    if common.overnight {
        cfg.overnight = true;
    }
    cfg.validate()?;
    if cfg.threads > 0 {
        // ignore failure when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, spot_trace } => cmd_simulate(&common, spot_trace),
        Command::Rv { common, ticks } => cmd_rv(&common, &ticks),
        Command::Fit { common, daily } => cmd_fit(&common, &daily),
        Command::Backtest { common, ticks } => cmd_backtest(&common, &ticks),
        Command::Study { common } => cmd_study(&common),
        Command::Report { dir } => cmd_report(&dir),
    }
}

fn cmd_simulate(common: &Common, spot_trace: bool) -> Result<()> {
    let cfg = load_config(common)?;
    ensure_dir(&common.out)?;
    let theta0 = structural_to_garch(&cfg.structural)?;
    for rep in 0..cfg.sim_reps {
        let seed = derive_seed(cfg.seed, rep as u64);
        let sim_cfg = SimConfig { seed, ..cfg.sim_config(seed) };
        let out = if spot_trace {
            simulate_with_trace(&sim_cfg)?
        } else {
            simulate(&sim_cfg)?
        };
        let tick_path = common.out.join(format!("ticks_{:04}.csv", rep + 1));
        io::write_ticks(&tick_path, &out.ticks, Some(seed))?;
        let truth_path = common.out.join(format!("truth_{:04}.csv", rep + 1));
        fs::write(&truth_path, io::render_truth(&out, &theta0, Some(seed))?)?;
        if let Some(trace) = &out.spot_var {
            let mut text = String::new();
            let _ = writeln!(text, "# seed={seed}");
            text.push_str("step,time,spot_var\n");
            let m_all = sim_cfg.m_all;
            for (i, v) in trace.iter().enumerate() {
                let _ = writeln!(text, "{},{},{}", i, i as f64 / m_all as f64, v);
            }
            fs::write(common.out.join(format!("spot_{:04}.csv", rep + 1)), text)?;
        }
        if out.clamp_events > 0 {
            eprintln!(
                "replication {}: spot variance clamped {} times",
                rep + 1,
                out.clamp_events
            );
        }
    }
    println!(
        "wrote {} replication(s) of {} days to {}",
        cfg.sim_reps,
        cfg.n_days,
        common.out.display()
    );
    Ok(())
}

fn cmd_rv(common: &Common, ticks_path: &Path) -> Result<()> {
    let cfg = load_config(common)?;
    ensure_dir(&common.out)?;
    let ticks = io::read_ticks(ticks_path)?;
    let series = build_daily_series(&ticks, &cfg.prv, cfg.overnight)?;
    let out_path = common.out.join("daily.csv");
    io::write_daily(&out_path, &series, Some(cfg.seed))?;
    if !series.negative_days.is_empty() {
        eprintln!(
            "note: negative total-variation estimates on {} day(s)",
            series.negative_days.len()
        );
    }
    println!("wrote {}", out_path.display());
    Ok(())
}

fn cmd_fit(common: &Common, daily_path: &Path) -> Result<()> {
    let cfg = load_config(common)?;
    ensure_dir(&common.out)?;
    let series = io::read_daily(daily_path)?;
    let opts = cfg.fit_options();
    let mut failures = Vec::new();
    // adjhuber rides on a huber fit; reuse it when both are requested
    let mut huber_fit = None;
    for name in &cfg.fit_methods {
        let method = Method::parse(name)?;
        let outcome = match method {
            Method::AdjHuber => {
                let base = match &huber_fit {
                    Some(f) => Ok(std::borrow::Cow::Borrowed(f)),
                    None => fit(Method::Huber, &series, &cfg.space, &opts)
                        .map(std::borrow::Cow::Owned),
                };
                base.and_then(|b| bias_adjust(&b, &series, &cfg.space))
            }
            m => fit(m, &series, &cfg.space, &opts),
        };
        match outcome {
            Ok(res) => {
                if method == Method::Huber {
                    huber_fit = Some(res.clone());
                }
                let adjusted_from = (method == Method::AdjHuber).then_some("huber");
                let path = common.out.join(format!("fit_{name}.txt"));
                fs::write(&path, io::render_fit(&res, name, adjusted_from, Some(cfg.seed)))?;
                let t = res.theta_hat;
                println!(
                    "{name}: omega_g={:.6} gamma={:.6} alpha_g={:.6} beta_g={:.6} converged={}",
                    t.omega_g, t.gamma, t.alpha_g, t.beta_g, res.converged
                );
            }
            Err(e) => {
                eprintln!("{name}: estimation failed: {e}");
                failures.push(name.clone());
            }
        }
    }
    if failures.len() == cfg.fit_methods.len() {
        return Err(ArgiError::Estimation("every requested method failed".into()));
    }
    Ok(())
}

fn fmt_csv_float(v: f64) -> String {
    format!("{v}")
}

fn cmd_backtest(common: &Common, ticks_path: &Path) -> Result<()> {
    let cfg = load_config(common)?;
    ensure_dir(&common.out)?;
    let ticks = io::read_ticks(ticks_path)?;
    let res = run_backtest(&ticks, &cfg)?;
    write_backtest_outputs(&common.out, &cfg, &res)?;
    println!(
        "backtest: {} forecast rows, {} skipped day(s), outputs in {}",
        res.rows.len(),
        res.skipped.len(),
        common.out.display()
    );
    Ok(())
}

fn write_backtest_outputs(dir: &Path, cfg: &RunConfig, res: &BacktestResult) -> Result<()> {
    let seed_line = format!("# seed={}\n", cfg.seed);

    let mut forecasts = seed_line.clone();
    forecasts.push_str("day,target");
    for l in &res.estimators {
        let _ = write!(forecasts, ",{l}");
    }
    forecasts.push('\n');
    for row in &res.rows {
        let _ = write!(forecasts, "{},{}", row.day, fmt_csv_float(row.target));
        for v in &row.vols {
            let _ = write!(forecasts, ",{}", fmt_csv_float(*v));
        }
        forecasts.push('\n');
    }
    fs::write(dir.join("forecasts.csv"), forecasts)?;

    let mut metrics_csv = seed_line.clone();
    metrics_csv.push_str("estimator,mspe,rmspe,qlike,rmspe_excluded\n");
    for (label, m) in &res.metrics {
        let _ = writeln!(
            metrics_csv,
            "{label},{},{},{},{}",
            fmt_csv_float(m.mspe),
            fmt_csv_float(m.rmspe),
            fmt_csv_float(m.qlike),
            m.rmspe_excluded
        );
    }
    fs::write(dir.join("metrics.csv"), metrics_csv)?;

    for (name, reference, table) in [
        ("dm_mspe.csv", "a_hub", &res.dm_mspe),
        ("dm_rmspe.csv", "a_hub", &res.dm_rmspe),
        ("dm_qlike.csv", "a_qmle", &res.dm_qlike),
    ] {
        let mut text = seed_line.clone();
        let _ = writeln!(text, "# reference={reference}");
        text.push_str("estimator,statistic,p_value,lags\n");
        for (label, cell) in table {
            match cell {
                DmCell::Stat(s) => {
                    let _ = writeln!(
                        text,
                        "{label},{},{},{}",
                        fmt_csv_float(s.statistic),
                        fmt_csv_float(s.p_value),
                        s.lags_used
                    );
                }
                DmCell::NoDifference => {
                    let _ = writeln!(text, "{label},,,no_difference");
                }
            }
        }
        fs::write(dir.join(name), text)?;
    }

    let mut acf = seed_line.clone();
    acf.push_str("estimator,lag,acf\n");
    let mut acf_max = seed_line.clone();
    acf_max.push_str("estimator,max_abs_acf,intercept,slope,degenerate\n");
    for (label, p) in &res.persistence {
        for (lag, v) in p.acf.iter().enumerate() {
            let _ = writeln!(acf, "{label},{lag},{}", fmt_csv_float(*v));
        }
        let _ = writeln!(
            acf_max,
            "{label},{},{},{},{}",
            fmt_csv_float(p.max_abs_acf),
            fmt_csv_float(p.intercept),
            fmt_csv_float(p.slope),
            p.degenerate
        );
    }
    fs::write(dir.join("acf.csv"), acf)?;
    fs::write(dir.join("acf_max.csv"), acf_max)?;

    let mut tuning = seed_line.clone();
    tuning.push_str("day,upsilon_hat,b_hat,c_tau,tau_n\n");
    for (day, t) in &res.tuning {
        let _ = writeln!(
            tuning,
            "{day},{},{},{},{}",
            fmt_csv_float(t.upsilon_hat),
            fmt_csv_float(t.b_hat),
            fmt_csv_float(t.c_tau),
            fmt_csv_float(t.tau_n)
        );
    }
    fs::write(dir.join("tuning.csv"), tuning)?;

    let mut skipped = seed_line.clone();
    skipped.push_str("day,reason\n");
    for (day, reason) in &res.skipped {
        let _ = writeln!(skipped, "{day},\"{}\"", reason.replace('"', "'"));
    }
    fs::write(dir.join("skipped.csv"), skipped)?;
    Ok(())
}

fn cmd_study(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    ensure_dir(&common.out)?;
    let labels: Vec<String> = cfg.backtest_estimators.clone();
    let res = run_study(&cfg, &labels)?;
    write_study_outputs(&common.out, &cfg, &res)?;
    println!(
        "study: {} cell-replications, {} excluded, outputs in {}",
        res.records.len(),
        res.excluded,
        common.out.display()
    );
    Ok(())
}

fn write_study_outputs(dir: &Path, cfg: &RunConfig, res: &StudyResult) -> Result<()> {
    let seed_line = format!("# seed={}\n", cfg.seed);

    let mut est = seed_line.clone();
    est.push_str("n,m,rep,estimator,omega_g,gamma,alpha_g,beta_g,converged,forecast,true_h_next\n");
    for rec in &res.records {
        if rec.error.is_some() {
            continue;
        }
        for e in &rec.estimates {
            let _ = writeln!(
                est,
                "{},{},{},{},{},{},{},{},{},{},{}",
                rec.n,
                rec.m,
                rec.rep + 1,
                e.estimator,
                fmt_csv_float(e.theta[0]),
                fmt_csv_float(e.theta[1]),
                fmt_csv_float(e.theta[2]),
                fmt_csv_float(e.theta[3]),
                e.converged,
                fmt_csv_float(e.forecast),
                fmt_csv_float(rec.true_h_next)
            );
        }
        let _ = writeln!(
            est,
            "{},{},{},prv,,,,,true,{},{}",
            rec.n,
            rec.m,
            rec.rep + 1,
            fmt_csv_float(rec.prv_forecast),
            fmt_csv_float(rec.true_h_next)
        );
    }
    fs::write(dir.join("study_estimates.csv"), est)?;

    let mut params = seed_line.clone();
    params.push_str("n,m,estimator,param,bias2,variance,mse\n");
    for row in res.param_summary() {
        let _ = writeln!(
            params,
            "{},{},{},{},{},{},{}",
            row.n,
            row.m,
            row.estimator,
            row.param,
            fmt_csv_float(row.bias2),
            fmt_csv_float(row.variance),
            fmt_csv_float(row.mse)
        );
    }
    fs::write(dir.join("study_params.csv"), params)?;

    let mut fcast = seed_line.clone();
    fcast.push_str("n,m,estimator,mspe,qlike\n");
    for row in res.forecast_summary() {
        let _ = writeln!(
            fcast,
            "{},{},{},{},{}",
            row.n,
            row.m,
            row.estimator,
            fmt_csv_float(row.mspe),
            fmt_csv_float(row.qlike)
        );
    }
    fs::write(dir.join("study_forecasts.csv"), fcast)?;

    let mut excl = seed_line.clone();
    excl.push_str("n,m,rep,reason\n");
    for rec in res.records.iter().filter(|r| r.error.is_some()) {
        let _ = writeln!(
            excl,
            "{},{},{},\"{}\"",
            rec.n,
            rec.m,
            rec.rep + 1,
            rec.error.as_deref().unwrap_or("").replace('"', "'")
        );
    }
    fs::write(dir.join("study_excluded.csv"), excl)?;
    Ok(())
}

fn cmd_report(dir: &Path) -> Result<()> {
    let mut printed = false;

    let mut fit_files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("fit_") && n.ends_with(".txt"))
                .unwrap_or(false)
        })
        .collect();
    fit_files.sort();
    if !fit_files.is_empty() {
        println!("== fits ==");
        println!(
            "{:<10} {:>12} {:>12} {:>12} {:>12} {:>10} {:>9}",
            "method", "omega_g", "gamma", "alpha_g", "beta_g", "tau_n", "converged"
        );
        for f in &fit_files {
            let kv = io::read_keyvalue(f)?;
            let get = |k: &str| {
                kv.iter()
                    .find(|(key, _)| key == k)
                    .map(|(_, v)| v.clone())
                    .unwrap_or_default()
            };
            println!(
                "{:<10} {:>12} {:>12} {:>12} {:>12} {:>10} {:>9}",
                get("method"),
                trim_num(&get("omega_g")),
                trim_num(&get("gamma")),
                trim_num(&get("alpha_g")),
                trim_num(&get("beta_g")),
                trim_num(&get("tau_n")),
                get("converged")
            );
        }
        printed = true;
    }

    for (file, title) in [
        ("metrics.csv", "backtest losses"),
        ("dm_mspe.csv", "DM vs a_hub (MSPE)"),
        ("dm_rmspe.csv", "DM vs a_hub (RMSPE)"),
        ("dm_qlike.csv", "DM vs a_qmle (QLIKE)"),
        ("acf_max.csv", "residual persistence"),
        ("study_params.csv", "study parameter summary"),
        ("study_forecasts.csv", "study forecast summary"),
    ] {
        let path = dir.join(file);
        if path.exists() {
            println!("== {title} ==");
            let text = fs::read_to_string(&path)?;
            for line in text.lines().filter(|l| !l.starts_with('#')) {
                println!("{}", line.replace(',', "\t"));
            }
            printed = true;
        }
    }
    if !printed {
        println!("no result files found in {}", dir.display());
    }
    Ok(())
}

fn trim_num(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(v) => format!("{v:.6}"),
        Err(_) => s.to_string(),
    }
}
