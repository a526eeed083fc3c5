//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use blowup_core::dynamics::run;
use blowup_core::functionals::{electro_bound_rhs, DiagnosticSeries};
use blowup_core::inequalities::hardy_property_suite;
use blowup_core::model::init_state;
use blowup_core::sweep::{load_runs, persist_runs, run_sweep, SweepResult};
use blowup_core::theorems::{
    check_hypotheses, envelope_rate, monitor_riccati, riccati_envelope, verdict, TheoremVerdict,
};
use blowup_core::{Delta, Error, Family, InitialDataSpec, ModelConfig, RadialGrid};
use serde::Serialize;

use crate::config::Config;
use crate::exit::{CliError, CHECK_FAILED, HYPOTHESIS, NUMERICAL};

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const STORE_FILE: &str = "runs.jsonl";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const FIT_FILE: &str = "fit.json";

const SERIES_HEADER: &str = "t,M,E_delta,F,Q,R,W,dF_dt,riccati_residual,envelope";
const SWEEP_HEADER: &str = "eps,F0,E0_hat,T_num,T_upper,T_lower_raw,ratio_upper,hypotheses_ok,censored";

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn ensure_fresh(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() && !force {
        return Err(CliError::config(format!(
            "output directory {} exists; pass --force to overwrite",
            dir.display()
        )));
    }
    Ok(())
}

fn hypothesis_gate(
    cfg: &ModelConfig,
    spec: &InitialDataSpec,
    grid: &RadialGrid,
    sigma: Option<f64>,
) -> Result<(), CliError> {
    let state0 = init_state(spec, cfg, grid)?;
    let report = check_hypotheses(&state0, grid, cfg, sigma);
    if !report.all_ok() {
        return Err(CliError::new(
            HYPOTHESIS,
            format!("theorem hypotheses fail at eps = {}: {}", spec.eps, report.details.join("; ")),
        ));
    }
    Ok(())
}

/// Electrostatic shift of the Riccati inequality, when it is defined.
fn bound_constant(cfg: &ModelConfig, spec: &InitialDataSpec, grid: &RadialGrid, sigma: Option<f64>) -> Option<f64> {
    if cfg.delta != Delta::Electrostatic {
        return None;
    }
    let state0 = init_state(spec, cfg, grid).ok()?;
    electro_bound_rhs(&state0, grid, sigma?, cfg.gamma).ok()
}

fn series_csv(series: &DiagnosticSeries, delta: Delta, bound_rhs: Option<f64>) -> String {
    let monitor = monitor_riccati(series, delta, bound_rhs).ok();
    let f0 = series.first().map(|r| r.f).unwrap_or(0.0);
    let rate = envelope_rate(delta);
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for (k, rec) in series.records.iter().enumerate() {
        let (d, res) = monitor
            .as_ref()
            .map_or((None, None), |m| (Some(m.dfdt[k]), Some(m.residuals[k])));
        let env = riccati_envelope(f0, rec.t, rate).ok();
        let fields = [
            num(rec.t),
            num(rec.mass),
            num(rec.e_delta),
            num(rec.f),
            num(rec.q),
            opt(rec.r),
            num(rec.w),
            opt(d),
            opt(res),
            opt(env),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct RunSummary<'a> {
    seed: u64,
    config: &'a ModelConfig,
    initial_data: &'a InitialDataSpec,
    n_cells: usize,
    r_max: f64,
    records: usize,
    t_num: Option<f64>,
    t_extrapolated: Option<f64>,
    blowup_criterion: Option<&'a str>,
    mass_drift: Option<f64>,
    bound_rhs: Option<f64>,
    verdict: Option<TheoremVerdict>,
    failure: Option<String>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::config(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn cmd_run(config: &Path, out: &Path, force: bool) -> Result<String, CliError> {
    let cfg = Config::load(config)?;
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let spec = cfg.initial_data()?;
    let sigma = cfg.sigma_for_run(model.delta);
    ensure_fresh(out, force)?;
    if cfg.verify_theorem {
        hypothesis_gate(&model, &spec, &grid, sigma)?;
    }
    let bound_rhs = bound_constant(&model, &spec, &grid, sigma);

    let outcome = run(&model, &spec, &grid);
    fs::create_dir_all(out)?;
    let mut summary = RunSummary {
        seed: cfg.seed,
        config: &model,
        initial_data: &spec,
        n_cells: grid.n_cells(),
        r_max: grid.r_max(),
        records: 0,
        t_num: None,
        t_extrapolated: None,
        blowup_criterion: None,
        mass_drift: None,
        bound_rhs,
        verdict: None,
        failure: None,
    };
    match outcome {
        Ok(result) => {
            fs::write(out.join(SERIES_FILE), series_csv(&result.series, model.delta, bound_rhs))?;
            summary.records = result.series.len();
            summary.t_num = result.t_num();
            summary.t_extrapolated = result.blowup.t_extrapolated;
            summary.blowup_criterion = Some(&result.blowup.criterion);
            summary.mass_drift = Some(result.mass_drift);
            summary.verdict = Some(verdict(&result, &grid, sigma)?);
            write_json(&out.join(SUMMARY_FILE), &summary)?;
            let t = summary
                .t_num
                .map_or_else(|| format!("no blow-up detected by t = {}", model.t_max), |t| format!("T_num = {t}"));
            Ok(format!("{} records written to {}; {t}\n", summary.records, out.display()))
        }
        Err(Error::NumericalFailure { t, reason, partial }) => {
            let partial = partial.map(|p| *p).unwrap_or_default();
            fs::write(out.join(SERIES_FILE), series_csv(&partial, model.delta, bound_rhs))?;
            summary.records = partial.len();
            summary.failure = Some(format!("numerical failure at t = {t:e}: {reason}"));
            write_json(&out.join(SUMMARY_FILE), &summary)?;
            Err(CliError::new(NUMERICAL, summary.failure.unwrap()))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct FitSummary<'a> {
    rows: usize,
    fitted_rows: usize,
    slope: Option<f64>,
    intercept: Option<f64>,
    r2: Option<f64>,
    deviation_from_minus_one: Option<f64>,
    warnings: &'a [String],
}

fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &result.rows {
        let fields = [
            num(r.eps),
            num(r.f0),
            num(r.e0_hat),
            opt(r.t_num),
            opt(r.t_upper),
            opt(r.t_lower_raw),
            opt(r.ratio_upper),
            u8::from(r.hypotheses_ok).to_string(),
            u8::from(r.censored).to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn cmd_sweep(config: &Path, out: &Path, force: bool, jobs: Option<usize>) -> Result<String, CliError> {
    let cfg = Config::load(config)?;
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let eps_list = cfg.eps_list()?;
    if cfg.family == Family::Table {
        return Err(CliError::config("sweeps need a scaling family, not table"));
    }
    if jobs == Some(0) {
        return Err(CliError::config("--jobs must be at least 1"));
    }
    let sigma = cfg.sigma_for_run(model.delta);
    ensure_fresh(out, force)?;
    if cfg.verify_theorem {
        for &eps in &eps_list {
            hypothesis_gate(&model, &InitialDataSpec::new(cfg.family, eps), &grid, sigma)?;
        }
    }

    let result = run_sweep(&eps_list, cfg.family, &model, &grid, sigma, jobs)?;
    fs::create_dir_all(out)?;
    persist_runs(&result, &out.join(STORE_FILE))?;
    fs::write(out.join(SWEEP_FILE), sweep_csv(&result))?;
    write_json(
        &out.join(FIT_FILE),
        &FitSummary {
            rows: result.rows.len(),
            fitted_rows: result.rows.iter().filter(|r| r.t_num.is_some()).count(),
            slope: result.fit.map(|f| f.slope),
            intercept: result.fit.map(|f| f.intercept),
            r2: result.fit.map(|f| f.r2),
            deviation_from_minus_one: result.fit.map(|f| f.slope + 1.0),
            warnings: &result.warnings,
        },
    )?;
    let text = report_table(&result);
    if let Some(row) = result.rows.iter().find(|r| r.failure.is_some()) {
        return Err(CliError::new(
            NUMERICAL,
            format!("{text}run at eps = {} failed: {}", row.eps, row.failure.as_deref().unwrap_or("")),
        ));
    }
    Ok(text)
}

pub fn cmd_check_inequalities(seed: u64, trials: usize) -> Result<String, CliError> {
    if trials == 0 {
        return Err(CliError::config("trials must be at least 1"));
    }
    let report = hardy_property_suite(seed, trials)?;
    let text = format!(
        "weighted Hardy inequality, seed {}\ntrials: {}\npassed: {}\nviolations: {}\ndivergent draws skipped: {}\nmax lhs/rhs: {}\n",
        report.seed,
        report.trials,
        report.trials - report.violations,
        report.violations,
        report.divergent,
        num(report.max_ratio),
    );
    if report.violations > 0 {
        return Err(CliError::new(CHECK_FAILED, text.trim_end()));
    }
    Ok(text)
}

pub fn cmd_report(store: &Path) -> Result<String, CliError> {
    let result = load_runs(store).map_err(|e| match e {
        Error::Io(io) => CliError::config(format!("cannot read store {}: {io}", store.display())),
        other => CliError::config(other),
    })?;
    Ok(report_table(&result))
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

fn report_table(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>13} {:>13} {:>13} {:>13} {:>13} {:>13} {:>4} {:>8}",
        "eps", "F0", "E0_hat", "T_num", "T_upper", "ratio_upper", "hyp", "censored"
    );
    for r in &result.rows {
        let _ = writeln!(
            s,
            "{:>13} {:>13} {:>13} {:>13} {:>13} {:>13} {:>4} {:>8}",
            cell(Some(r.eps)),
            cell(Some(r.f0)),
            cell(Some(r.e0_hat)),
            cell(r.t_num),
            cell(r.t_upper),
            cell(r.ratio_upper),
            u8::from(r.hypotheses_ok),
            u8::from(r.censored),
        );
    }
    if result.rows.iter().all(|r| r.t_num.is_none()) {
        s.push_str("no completed runs\n");
    } else {
        match result.fit {
            Some(f) => {
                let _ = writeln!(
                    s,
                    "fit: T_num ~ eps^{:.6} (deviation from -1: {:+.6}), intercept {:.6}, r2 {:.6}",
                    f.slope,
                    f.slope + 1.0,
                    f.intercept,
                    f.r2
                );
            }
            None => s.push_str("fit: fewer than 3 completed runs\n"),
        }
    }
    for w in &result.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
