//! Parameter sweeps over the scaling parameter ε, power-law fits of the
//! detected lifespan, and a line-delimited JSON record store.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{linear_fit, run};
use crate::error::{Error, Result};
use crate::functionals::{f_functional, sobolev_surrogate_energy};
use crate::model::{init_state, Family, InitialDataSpec, ModelConfig, RadialGrid};
use crate::theorems::{check_hypotheses, lifespan_upper, wellposed_lower};

pub const STORE_VERSION: u64 = 1;

/// Fraction of censored rows above which a sweep carries a warning.
pub const CENSORED_WARNING_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub eps: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "E0_hat")]
    pub e0_hat: f64,
    #[serde(rename = "T_num")]
    pub t_num: Option<f64>,
    #[serde(rename = "T_upper")]
    pub t_upper: Option<f64>,
    #[serde(rename = "T_lower_raw")]
    pub t_lower_raw: Option<f64>,
    pub ratio_upper: Option<f64>,
    pub hypotheses_ok: bool,
    /// Reached `t_max` without triggering the detector.
    pub censored: bool,
    /// Solver failure message, if the run aborted.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: Option<PowerLawFit>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    /// Orders rows by ε and derives the fit and warnings from them.
    pub fn from_rows(mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        let pairs: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.t_num.map(|t| (r.eps, t))).collect();
        let fit = if pairs.len() >= 3 { fit_powerlaw(&pairs).ok() } else { None };
        let mut warnings = Vec::new();
        let censored = rows.iter().filter(|r| r.censored).count();
        if !rows.is_empty() && censored as f64 > CENSORED_WARNING_FRACTION * rows.len() as f64 {
            warnings.push(format!("{censored} of {} runs reached t_max without blow-up", rows.len()));
        }
        let failed = rows.iter().filter(|r| r.failure.is_some()).count();
        if failed > 0 {
            warnings.push(format!("{failed} of {} runs failed", rows.len()));
        }
        Self { rows, fit, warnings }
    }
}

/// Least squares of `log y` against `log x`.
pub fn fit_powerlaw(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 pairs (got {})", pairs.len())));
    }
    if pairs.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("power-law fit needs positive finite values"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::invalid("power-law fit needs at least two distinct x"))?;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(PowerLawFit { slope, intercept, r2 })
}

fn sweep_row(eps: f64, family: Family, cfg: &ModelConfig, grid: &RadialGrid, sigma: Option<f64>) -> Result<SweepRow> {
    let spec = InitialDataSpec::new(family, eps);
    let state0 = init_state(&spec, cfg, grid)?;
    let f0 = f_functional(&state0, grid);
    let e0_hat = sobolev_surrogate_energy(&state0, grid, cfg.gamma)?;
    let hypotheses_ok = check_hypotheses(&state0, grid, cfg, sigma).all_ok();
    let t_upper = lifespan_upper(cfg.delta, f0).ok();
    let t_lower_raw = wellposed_lower(cfg.delta, e0_hat, cfg.gamma).ok();
    let (t_num, censored, failure) = match run(cfg, &spec, grid) {
        Ok(res) => (res.t_num(), res.t_num().is_none(), None),
        Err(e @ Error::NumericalFailure { .. }) => (None, false, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        eps,
        f0,
        e0_hat,
        t_num,
        t_upper,
        t_lower_raw,
        ratio_upper: t_num.zip(t_upper).map(|(n, u)| n / u),
        hypotheses_ok,
        censored,
        failure,
    })
}

/// One run per ε, dispatched in parallel on `jobs` threads (all cores when
/// `None`). Solver failures are recorded per row.
pub fn run_sweep(
    eps_list: &[f64],
    family: Family,
    cfg: &ModelConfig,
    grid: &RadialGrid,
    sigma: Option<f64>,
    jobs: Option<usize>,
) -> Result<SweepResult> {
    if eps_list.is_empty() {
        return Err(Error::invalid("eps_list must not be empty"));
    }
    if let Some(bad) = eps_list.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid(format!("eps values must be positive (got {bad})")));
    }
    if family == Family::Table {
        return Err(Error::invalid("sweeps need a scaling family"));
    }
    cfg.validate()?;
    let compute = || -> Result<Vec<SweepRow>> {
        eps_list
            .par_iter()
            .map(|&eps| sweep_row(eps, family, cfg, grid, sigma))
            .collect()
    };
    let rows = match jobs {
        Some(0) => return Err(Error::invalid("jobs must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(compute)?,
        None => compute()?,
    };
    Ok(SweepResult::from_rows(rows))
}

/// Writes a header record followed by one record per row.
pub fn persist_runs(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", serde_json::json!({ "v": STORE_VERSION, "kind": "header" }))?;
    for row in &result.rows {
        let mut value = serde_json::to_value(row).map_err(|e| Error::invalid(e.to_string()))?;
        value
            .as_object_mut()
            .expect("rows serialize as objects")
            .insert("v".into(), STORE_VERSION.into());
        writeln!(out, "{value}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_runs(path: &Path) -> Result<SweepResult> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |message: String| Error::Parse { line: line_no, message };
        let mut value: Value = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
        let obj = value.as_object_mut().ok_or_else(|| parse("record is not an object".into()))?;
        let version = obj
            .remove("v")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| parse("missing schema version \"v\"".into()))?;
        if version != STORE_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: STORE_VERSION,
            });
        }
        if obj.get("kind").and_then(Value::as_str) == Some("header") {
            if saw_header {
                return Err(parse("duplicate header record".into()));
            }
            saw_header = true;
            continue;
        }
        if !saw_header {
            return Err(parse("first record must be the header".into()));
        }
        rows.push(serde_json::from_value::<SweepRow>(value).map_err(|e| parse(e.to_string()))?);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "missing header record".into(),
        });
    }
    Ok(SweepResult::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grid, Delta};
    use approx::assert_relative_eq;

    fn row(eps: f64, t: Option<f64>) -> SweepRow {
        SweepRow {
            eps,
            f0: 0.1 * eps,
            e0_hat: eps * eps,
            t_num: t,
            t_upper: Some(20.0 / eps),
            t_lower_raw: Some(1.0 / eps),
            ratio_upper: t.map(|t| t * eps / 20.0),
            hypotheses_ok: true,
            censored: t.is_none(),
            failure: None,
        }
    }

    #[test]
    fn powerlaw_examples() {
        let f = fit_powerlaw(&[(1.0, 1.0), (2.0, 0.5), (4.0, 0.25)]).unwrap();
        assert_relative_eq!(f.slope, -1.0, epsilon = 1e-14);
        assert_relative_eq!(f.r2, 1.0, epsilon = 1e-14);
        let f = fit_powerlaw(&[(1.0, 3.0), (2.0, 3.0), (4.0, 3.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert!(fit_powerlaw(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_powerlaw(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn rows_are_ordered_and_fit_needs_three() {
        let r = SweepResult::from_rows(vec![row(0.4, Some(1.0)), row(0.1, Some(4.0)), row(0.2, None)]);
        assert_eq!(r.rows.iter().map(|r| r.eps).collect::<Vec<_>>(), vec![0.1, 0.2, 0.4]);
        assert!(r.fit.is_none());
        assert_eq!(r.warnings.len(), 1);
        let r = SweepResult::from_rows(vec![row(0.4, Some(1.0)), row(0.1, Some(4.0)), row(0.2, Some(2.0))]);
        assert_relative_eq!(r.fit.unwrap().slope, -1.0, epsilon = 1e-12);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let result = SweepResult::from_rows(vec![
            row(0.05, Some(13.1)),
            row(0.1, Some(1.0 / 3.0)),
            row(0.2, None),
            row(0.4, Some(0.1 + 0.2)),
        ]);
        persist_runs(&result, &path).unwrap();
        assert_eq!(load_runs(&path).unwrap(), result);

        let empty = SweepResult::from_rows(vec![]);
        persist_runs(&empty, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
        assert_eq!(load_runs(&path).unwrap(), empty);
    }

    #[test]
    fn store_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        persist_runs(&SweepResult::from_rows(vec![row(0.1, Some(2.0)), row(0.2, Some(1.0))]), &path).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text = text.replacen("\"eps\":0.2", "\"eps\":", 1);
        fs::write(&path, &text).unwrap();
        match load_runs(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }

        fs::write(&path, "{\"v\":2,\"kind\":\"header\"}\n").unwrap();
        assert!(matches!(load_runs(&path), Err(Error::VersionMismatch { found: 2, expected: 1 })));
        fs::write(&path, "").unwrap();
        assert!(matches!(load_runs(&path), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sweep_validation() {
        let grid = make_grid(20.0, 64).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        assert!(matches!(
            run_sweep(&[], Family::SharpScaling, &cfg, &grid, None, None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(run_sweep(&[0.1, -1.0], Family::SharpScaling, &cfg, &grid, None, None).is_err());
        assert!(run_sweep(&[0.1], Family::SharpScaling, &cfg, &grid, None, Some(0)).is_err());
    }

    #[test]
    fn small_sweep_is_order_independent() {
        let grid = make_grid(20.0, 256).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let a = run_sweep(&[0.2, 0.1, 0.4], Family::SharpScaling, &cfg, &grid, None, Some(1)).unwrap();
        let b = run_sweep(&[0.4, 0.2, 0.1], Family::SharpScaling, &cfg, &grid, None, Some(3)).unwrap();
        assert_eq!(a, b);
        for r in &a.rows {
            assert!(r.hypotheses_ok);
            assert_relative_eq!(r.f0 / r.eps, a.rows[0].f0 / a.rows[0].eps, max_relative = 1e-12);
            assert_relative_eq!(r.e0_hat / (r.eps * r.eps), a.rows[0].e0_hat / 0.01, max_relative = 1e-12);
            assert!(r.ratio_upper.unwrap() <= 1.0);
        }
        let fit = a.fit.unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05, "{fit:?}");
    }
}
