//! File formats: tick CSV (`day,time,logprice`), daily CSV
//! (`day,v_hat,rv,ret`), truth CSV, and the key-value fit result files.
//!
//! All tabular outputs are plain CSV with headers. A leading `# key=value`
//! comment line records the seed (and friends); readers skip `#` lines.
//! Floats are written with Rust's shortest round-trip formatting so outputs
//! are byte-stable and lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ArgiError, Result};
use crate::estimate::FitResult;
use crate::model::GarchParams;
use crate::realized::DailySeries;
use crate::simulate::{SimOutput, TickDay, TickSeries};

fn parse_err(file: &Path, line: usize, message: impl Into<String>) -> ArgiError {
    ArgiError::Parse {
        file: file.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Renders the tick series. Each day emits its open (time 0) and interior
/// ticks; the close is carried by the next day's open row, and the final open
/// appears as a `time=0` row for day `n+1`. Days whose last tick is not the
/// next open (overnight gaps in user data) additionally emit a `time=1` row.
pub fn render_ticks(ticks: &TickSeries, seed: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(s) = seed {
        let _ = writeln!(out, "# seed={s}");
    }
    out.push_str("day,time,logprice\n");
    let n = ticks.n_days();
    for (d, day) in ticks.days.iter().enumerate() {
        let last = day.times.len() - 1;
        for (j, (&t, &p)) in day.times.iter().zip(&day.prices).enumerate() {
            let frac = t - d as f64;
            if j == last && (frac - 1.0).abs() < 1e-12 {
                // suppress the close when it duplicates the next open
                if p == ticks.opens[d + 1] {
                    continue;
                }
                let _ = writeln!(out, "{},1,{}", d + 1, p);
            } else {
                let _ = writeln!(out, "{},{},{}", d + 1, frac, p);
            }
        }
    }
    let _ = writeln!(out, "{},0,{}", n + 1, ticks.opens[n]);
    out
}

pub fn write_ticks(path: &Path, ticks: &TickSeries, seed: Option<u64>) -> Result<()> {
    fs::write(path, render_ticks(ticks, seed))?;
    Ok(())
}

/// Reads a tick CSV. Day rows must be grouped and time-sorted; each day needs
/// a `time=0` open row. A day's close is its `time=1` row when present,
/// otherwise the next day's open.
pub fn read_ticks(path: &Path) -> Result<TickSeries> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "day,time,logprice" {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected header 'day,time,logprice', got '{line}'"),
                ));
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split(',');
        let day: usize = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno, "missing day column"))?
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad day: {e}")))?;
        let time: f64 = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno, "missing time column"))?
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad time: {e}")))?;
        let price: f64 = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno, "missing logprice column"))?
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad logprice: {e}")))?;
        if parts.next().is_some() {
            return Err(parse_err(path, lineno, "too many columns"));
        }
        if day == 0 {
            return Err(parse_err(path, lineno, "day indices are 1-based"));
        }
        if !(0.0..=1.0).contains(&time) {
            return Err(parse_err(path, lineno, format!("time {time} outside [0,1]")));
        }
        rows.push((day, time, price));
    }
    if !saw_header {
        return Err(parse_err(path, 1, "empty tick file"));
    }
    let max_day = rows.iter().map(|r| r.0).max().unwrap_or(0);
    if max_day < 2 {
        return Err(parse_err(path, 1, "tick file must cover at least 2 day groups"));
    }
    // group by day
    let mut per_day: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_day];
    for (day, time, price) in rows {
        per_day[day - 1].push((time, price));
    }
    // the last day group holds only the final open
    let n_days = max_day - 1;
    let last = &per_day[n_days];
    if last.len() != 1 || last[0].0 != 0.0 {
        return Err(parse_err(
            path,
            1,
            format!(
                "day {} must contain exactly the final open row (time=0), got {} rows",
                max_day,
                last.len()
            ),
        ));
    }
    let mut opens = Vec::with_capacity(n_days + 1);
    for (d, day_rows) in per_day[..n_days].iter().enumerate() {
        let first = day_rows
            .first()
            .ok_or_else(|| parse_err(path, 1, format!("day {} has no rows", d + 1)))?;
        if first.0 != 0.0 {
            return Err(parse_err(
                path,
                1,
                format!("day {} is missing its open (time=0) row", d + 1),
            ));
        }
        if !day_rows.windows(2).all(|w| w[1].0 > w[0].0) {
            return Err(parse_err(
                path,
                1,
                format!("day {} times are not strictly increasing", d + 1),
            ));
        }
        opens.push(first.1);
    }
    opens.push(per_day[n_days][0].1);

    let mut days = Vec::with_capacity(n_days);
    for (d, day_rows) in per_day[..n_days].iter().enumerate() {
        let mut times: Vec<f64> = day_rows.iter().map(|(t, _)| d as f64 + t).collect();
        let mut prices: Vec<f64> = day_rows.iter().map(|(_, p)| *p).collect();
        let has_close = (day_rows.last().unwrap().0 - 1.0).abs() < 1e-12;
        if !has_close {
            times.push((d + 1) as f64);
            prices.push(opens[d + 1]);
        } else {
            *times.last_mut().unwrap() = (d + 1) as f64;
        }
        days.push(TickDay { times, prices });
    }
    let ticks = TickSeries { days, opens };
    ticks.validate()?;
    Ok(ticks)
}

/// Daily series CSV with header `day,v_hat,rv,ret`.
pub fn render_daily(series: &DailySeries, seed: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(s) = seed {
        let _ = writeln!(out, "# seed={s}");
    }
    out.push_str("day,v_hat,rv,ret\n");
    for d in 0..series.n_days() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            d + 1,
            series.v_hat[d],
            series.rv[d],
            series.ret[d]
        );
    }
    out
}

pub fn write_daily(path: &Path, series: &DailySeries, seed: Option<u64>) -> Result<()> {
    fs::write(path, render_daily(series, seed))?;
    Ok(())
}

pub fn read_daily(path: &Path) -> Result<DailySeries> {
    let text = fs::read_to_string(path)?;
    let mut v_hat = Vec::new();
    let mut rv = Vec::new();
    let mut ret = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let cols: Vec<&str> = line.split(',').collect();
            if cols != ["day", "v_hat", "rv", "ret"] {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected header 'day,v_hat,rv,ret', got '{line}'"),
                ));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 4 columns, got {}", cols.len()),
            ));
        }
        let day: usize = cols[0]
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad day: {e}")))?;
        if day != v_hat.len() + 1 {
            return Err(parse_err(
                path,
                lineno,
                format!("days must be contiguous from 1; expected {}", v_hat.len() + 1),
            ));
        }
        for (name, col, dst) in [
            ("v_hat", cols[1], &mut v_hat),
            ("rv", cols[2], &mut rv),
            ("ret", cols[3], &mut ret),
        ] {
            let v: f64 = col
                .parse()
                .map_err(|e| parse_err(path, lineno, format!("bad {name}: {e}")))?;
            dst.push(v);
        }
    }
    if !saw_header {
        return Err(parse_err(path, 1, "empty daily file"));
    }
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
    series.validate()?;
    Ok(series)
}

/// Per-day ground truth of one simulated replication. `h_next` on day `d` is
/// the conditional variance of day `d+1` given information through day `d`;
/// the last row carries the forecast target.
pub fn render_truth(out_sim: &SimOutput, theta0: &GarchParams, seed: Option<u64>) -> Result<String> {
    let h_path = crate::simulate::true_h_path(out_sim, theta0)?;
    let mut out = String::new();
    if let Some(s) = seed {
        let _ = writeln!(out, "# seed={s}");
    }
    out.push_str("day,true_iv,true_jv,ret,h_next\n");
    for d in 0..out_sim.true_iv.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            d + 1,
            out_sim.true_iv[d],
            out_sim.true_jv[d],
            out_sim.true_x[d + 1] - out_sim.true_x[d],
            h_path[d]
        );
    }
    Ok(out)
}

/// Key-value fit result file.
pub fn render_fit(fit: &FitResult, label: &str, adjusted_from: Option<&str>, seed: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(s) = seed {
        let _ = writeln!(out, "# seed={s}");
    }
    let _ = writeln!(out, "method={label}");
    if let Some(base) = adjusted_from {
        let _ = writeln!(out, "adjusted_from={base}");
    }
    let t = fit.theta_hat.as_array();
    for (name, v) in GarchParams::NAMES.iter().zip(t) {
        let _ = writeln!(out, "{name}={v}");
    }
    let _ = writeln!(out, "objective={}", fit.objective_value);
    let _ = writeln!(out, "iterations={}", fit.n_iterations);
    let _ = writeln!(out, "converged={}", fit.converged);
    let _ = writeln!(out, "h1={}", fit.h1);
    let _ = writeln!(out, "projected={}", fit.projected);
    let _ = writeln!(out, "floor_events={}", fit.floor_events);
    if let Some(t) = &fit.tuning {
        let _ = writeln!(out, "upsilon_hat={}", t.upsilon_hat);
        let _ = writeln!(out, "b_hat={}", t.b_hat);
        let _ = writeln!(out, "c_tau={}", t.c_tau);
        let _ = writeln!(out, "tau_n={}", t.tau_n);
    }
    if let Some(v1) = fit.v1_hat {
        let _ = writeln!(out, "v1_hat={v1}");
    }
    for j in 0..4 {
        for k in 0..4 {
            let _ = writeln!(out, "v2_{j}{k}={}", fit.v2_hat[j][k]);
        }
    }
    out
}

/// Parses a fit result file back into label/value pairs (for `argi report`).
pub fn read_keyvalue(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                return Err(parse_err(path, idx + 1, "expected key=value"));
            }
        }
    }
    Ok(out)
}
