//! Experiment commands. Each returns a CSV table; the caller decides where it goes.

use std::path::Path;
use std::time::Duration;

use risctl_core::control::{by_destination, min_lambda_obcc, reliability_frontier};
use risctl_core::engine::calibrate_gamma0;
use risctl_core::units::{db_to_linear, linear_to_db};
use risctl_core::{CcKind, Experiment, Paradigm};

use crate::config::Settings;
use crate::csv::{fmt_num, CsvTable};
use crate::error::{CliError, CliResult};

/// `series,sample_snr_db`: sorted actual and estimated SNRs of the chosen configurations.
pub fn snr_cdf(s: &Settings) -> CliResult<CsvTable> {
    let exp = Experiment::new(s.default_experiment()?)?;
    let summary = exp.run(s.n_trials, s.master_seed)?;
    let mut table = CsvTable::new(&["series", "sample_snr_db"]);
    for (series, samples) in [
        ("actual", &summary.actual_snr_samples),
        ("estimated", &summary.estimated_snr_samples),
    ] {
        for &v in samples {
            table.push(&[series.into(), fmt_num(linear_to_db(v))]);
        }
    }
    Ok(table)
}

fn millis(ms: f64) -> CliResult<Duration> {
    if !(ms > 0.0 && ms.is_finite()) {
        return Err(CliError::Config(format!(
            "frame length must be positive, got {ms} ms"
        )));
    }
    Ok(Duration::from_nanos((ms * 1e6).round() as u64))
}

/// `tau_ms,paradigm,cc_kind,mean_goodput_bps,empirical_p_ae` over a frame-length grid.
pub fn goodput_sweep(
    s: &Settings,
    tau_ms: &[f64],
    paradigms: &[Paradigm],
    cc_kinds: &[CcKind],
) -> CliResult<CsvTable> {
    if tau_ms.is_empty() || paradigms.is_empty() || cc_kinds.is_empty() {
        return Err(CliError::Config("goodput sweep over an empty grid".into()));
    }
    // build every point first so configuration errors surface before any simulation
    let mut points = Vec::new();
    for &tau in tau_ms {
        for &paradigm in paradigms {
            for &cc in cc_kinds {
                let mut cfg = s.experiment(paradigm, cc)?;
                cfg.frame.tau = millis(tau)?;
                points.push((tau, paradigm, cc, Experiment::new(cfg)?));
            }
        }
    }
    let mut table = CsvTable::new(&[
        "tau_ms",
        "paradigm",
        "cc_kind",
        "mean_goodput_bps",
        "empirical_p_ae",
    ]);
    for (tau, paradigm, cc, exp) in points {
        let summary = exp.run(s.n_trials, s.master_seed)?;
        table.push(&[
            fmt_num(tau),
            paradigm.to_string(),
            cc.to_string(),
            fmt_num(summary.mean_goodput_bps),
            fmt_num(summary.empirical_p_ae),
        ]);
    }
    Ok(table)
}

/// `gamma0_db,mean_goodput_bps` for the configured sweeping paradigm, plus the best γ₀.
pub fn calibrate(s: &Settings, gamma0_db: &[f64]) -> CliResult<(CsvTable, f64)> {
    if gamma0_db.is_empty() {
        return Err(CliError::Config("calibration over an empty grid".into()));
    }
    if !s.paradigm.is_bsw() {
        return Err(CliError::Config(
            "calibrate needs paradigm = bsw-fixed or bsw-flexible".into(),
        ));
    }
    let cfg = s.default_experiment()?;
    Experiment::new(cfg.clone())?;
    let cal = calibrate_gamma0(&cfg, gamma0_db, s.n_trials, s.master_seed)?;
    let mut table = CsvTable::new(&["gamma0_db", "mean_goodput_bps"]);
    for (db, g) in &cal.table {
        table.push(&[fmt_num(*db), fmt_num(*g)]);
    }
    Ok((table, cal.best_gamma0_db))
}

/// `one_minus_pcc,mean_utility_bps`: `p_cc` times the mean goodput under error-free control.
pub fn utility(s: &Settings, one_minus_pcc: &[f64]) -> CliResult<CsvTable> {
    if one_minus_pcc.is_empty() {
        return Err(CliError::Config("utility over an empty grid".into()));
    }
    if let Some(bad) = one_minus_pcc.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(CliError::Config(format!(
            "1 - p_cc must lie in [0, 1], got {bad}"
        )));
    }
    let mut cfg = s.default_experiment()?;
    cfg.lambda_u = f64::INFINITY;
    cfg.lambda_r = f64::INFINITY;
    let perfect = Experiment::new(cfg)?.run(s.n_trials, s.master_seed)?;
    let mut table = CsvTable::new(&["one_minus_pcc", "mean_utility_bps"]);
    for &x in one_minus_pcc {
        table.push(&[fmt_num(x), fmt_num((1.0 - x) * perfect.mean_goodput_bps)]);
    }
    Ok(table)
}

/// `lambda_u_db,lambda_r_db_min,feasible` at the configured reliability target.
///
/// Out of band the RIS link is error free, so a single row carries the minimum
/// `λ_u` and `lambda_r_db_min = -inf`.
pub fn reliability(s: &Settings, lambda_u_db: &[f64]) -> CliResult<CsvTable> {
    let exp = Experiment::new(s.default_experiment()?)?;
    let (ue, ris) = by_destination(exp.budgets());
    let mut table = CsvTable::new(&["lambda_u_db", "lambda_r_db_min", "feasible"]);
    match s.cc_kind {
        CcKind::Obcc => {
            let l = min_lambda_obcc(s.target_pcc, &ue)?;
            table.push(&[
                fmt_num(linear_to_db(l)),
                fmt_num(f64::NEG_INFINITY),
                "true".into(),
            ]);
        }
        CcKind::Ibcc => {
            if lambda_u_db.is_empty() {
                return Err(CliError::Config("reliability over an empty grid".into()));
            }
            let grid: Vec<f64> = lambda_u_db.iter().map(|&db| db_to_linear(db)).collect();
            for (db, p) in
                lambda_u_db
                    .iter()
                    .zip(reliability_frontier(s.target_pcc, &ue, &ris, &grid)?)
            {
                let (r, feasible) = match p.lambda_r_min {
                    Some(l) => (fmt_num(linear_to_db(l)), "true"),
                    None => (fmt_num(f64::INFINITY), "false"),
                };
                table.push(&[fmt_num(*db), r, feasible.into()]);
            }
        }
    }
    Ok(table)
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(table: &CsvTable, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, table.as_str())
            .map_err(|e| CliError::Runtime(anyhow::anyhow!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(table.as_str().as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
