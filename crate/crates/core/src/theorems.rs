//! Lifespan predictors, Riccati envelopes and per-step monitors.
//!
//! Along a classical solution with `ρ(t, 0) = 0` the weighted radial velocity
//! obeys `F' ≥ Q ≥ F²/2` (δ ∈ {0, −1}) or `F' ≥ Q − K₀ ≥ F²/2 − K₀` (δ = +1,
//! `K₀ = c₁(M(0) + (γ−1)E₁(0)) + c₂`). The monitors here evaluate the
//! discrete residual of these inequalities on a recorded [`DiagnosticSeries`]
//! and compare `F(t)` against the comparison solution `F₀ / (1 − rate·F₀·t)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::RunResult;
use crate::error::{Error, Result};
use crate::functionals::{
    check_gamma_window, largeness_condition, electro_bound_rhs, f_functional, LargenessCondition, DiagnosticSeries,
};
use crate::model::{init_state, Delta, Family, FluidState, ModelConfig, RadialGrid};

/// Envelope rate for the Euler and gravitational cases.
pub const RATE_HALF: f64 = 0.5;
/// Envelope rate for the electrostatic case.
pub const RATE_QUARTER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Euler,
    Gravity,
    Electrostatic,
    SharpEuler,
    SharpGravity,
}

impl TheoremId {
    pub fn for_run(delta: Delta, family: Family) -> Self {
        match (delta, family) {
            (Delta::Euler, Family::SharpScaling) => TheoremId::SharpEuler,
            (Delta::Gravity, Family::SharpScaling) => TheoremId::SharpGravity,
            (Delta::Euler, _) => TheoremId::Euler,
            (Delta::Gravity, _) => TheoremId::Gravity,
            (Delta::Electrostatic, _) => TheoremId::Electrostatic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub center_density_ok: bool,
    /// `max(ρ₀, ρ₁)` over the two innermost cells.
    pub center_density: f64,
    /// `10 Δr² max ρ`.
    pub center_tolerance: f64,
    pub f0: f64,
    pub f0_positive: bool,
    /// Only checked for δ = +1.
    pub gamma_window_ok: Option<bool>,
    pub largeness_condition: Option<LargenessCondition>,
    pub details: Vec<String>,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.center_density_ok
            && self.f0_positive
            && self.gamma_window_ok.unwrap_or(true)
            && self.largeness_condition.is_none_or(|c| c.holds)
    }
}

/// Checks `ρ₀(0) = 0`, `F(0) > 0` and, for δ = +1, the γ–σ window and the
/// largeness condition. Never fails; problems are listed in `details`.
pub fn check_hypotheses(
    state0: &FluidState,
    grid: &RadialGrid,
    cfg: &ModelConfig,
    sigma: Option<f64>,
) -> HypothesisReport {
    let mut details = Vec::new();
    let dr = grid.dr();
    let max_rho = state0.rho.iter().copied().fold(0.0, f64::max);
    let center_density = state0.rho.iter().take(2).copied().fold(0.0, f64::max);
    let center_tolerance = 10.0 * dr * dr * max_rho;
    let center_density_ok = center_density <= center_tolerance;
    if !center_density_ok {
        details.push(format!(
            "rho0 near r = 0 is {center_density:e}, above tolerance {center_tolerance:e}"
        ));
    }
    let f0 = f_functional(state0, grid);
    let f0_positive = f0 > 0.0;
    if !f0_positive {
        details.push(format!("F(0) = {f0} is not positive"));
    }

    let (gamma_window_ok, cond) = if cfg.delta == Delta::Electrostatic {
        match sigma {
            None => {
                details.push("sigma is required for delta = +1".into());
                (Some(false), None)
            }
            Some(sigma) => match check_gamma_window(sigma, cfg.gamma) {
                Err(e) => {
                    details.push(e.to_string());
                    (Some(false), None)
                }
                Ok(()) => match largeness_condition(state0, grid, sigma, cfg.gamma) {
                    Ok(c) => {
                        if !c.holds {
                            details.push(format!(
                                "largeness condition fails: F(0)^2/4 = {} < {}",
                                c.lhs, c.rhs
                            ));
                        }
                        (Some(true), Some(c))
                    }
                    Err(e) => {
                        details.push(e.to_string());
                        (Some(false), None)
                    }
                },
            },
        }
    } else {
        (None, None)
    };

    HypothesisReport {
        center_density_ok,
        center_density,
        center_tolerance,
        f0,
        f0_positive,
        gamma_window_ok,
        largeness_condition: cond,
        details,
    }
}

/// `2/F₀` for δ ∈ {0, −1}, `4/F₀` for δ = +1.
pub fn lifespan_upper(delta: Delta, f0: f64) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::hypothesis(format!("F(0) must be positive (got {f0})")));
    }
    Ok(match delta {
        Delta::Electrostatic => 4.0 / f0,
        _ => 2.0 / f0,
    })
}

pub fn envelope_rate(delta: Delta) -> f64 {
    match delta {
        Delta::Electrostatic => RATE_QUARTER,
        _ => RATE_HALF,
    }
}

/// Comparison solution `F₀ / (1 − rate·F₀·t)` of `y' = 2·rate·y²`.
pub fn riccati_envelope(f0: f64, t: f64, rate: f64) -> Result<f64> {
    if !(f0 > 0.0) {
        return Err(Error::hypothesis(format!("F(0) must be positive (got {f0})")));
    }
    if !(rate > 0.0) {
        return Err(Error::invalid(format!("rate must be positive (got {rate})")));
    }
    let denom = 1.0 - rate * f0 * t;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "t = {t} is at or past the pole {}",
            1.0 / (rate * f0)
        )));
    }
    Ok(f0 / denom)
}

/// Discrete residual series of the Riccati inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiMonitor {
    pub dfdt: Vec<f64>,
    pub residuals: Vec<f64>,
    pub min_residual: f64,
}

/// `dF/dt` on possibly non-uniform stamps: three-point centered formula in
/// the interior, one-sided differences at both ends.
pub fn time_derivative(t: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    if n < 3 || f.len() != n {
        return Err(Error::invalid(format!(
            "need at least 3 matching samples for a derivative (got {n})"
        )));
    }
    let mut d = Vec::with_capacity(n);
    d.push((f[1] - f[0]) / (t[1] - t[0]));
    for k in 1..n - 1 {
        let hm = t[k] - t[k - 1];
        let hp = t[k + 1] - t[k];
        d.push((hm * hm * f[k + 1] - hp * hp * f[k - 1] + (hp * hp - hm * hm) * f[k]) / (hm * hp * (hm + hp)));
    }
    d.push((f[n - 1] - f[n - 2]) / (t[n - 1] - t[n - 2]));
    Ok(d)
}

/// Residuals `dF/dt − Q + shift` on raw arrays.
pub fn riccati_residuals(t: &[f64], f: &[f64], q: &[f64], shift: f64) -> Result<RiccatiMonitor> {
    let dfdt = time_derivative(t, f)?;
    let residuals: Vec<f64> = dfdt.iter().zip(q).map(|(d, q)| d - q + shift).collect();
    let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RiccatiMonitor {
        dfdt,
        residuals,
        min_residual,
    })
}

/// Residual of `F' ≥ Q` (δ ∈ {0, −1}) or of `F' ≥ Q − bound_rhs` (δ = +1).
pub fn monitor_riccati(series: &DiagnosticSeries, delta: Delta, bound_rhs: Option<f64>) -> Result<RiccatiMonitor> {
    let shift = match delta {
        Delta::Electrostatic => bound_rhs
            .ok_or_else(|| Error::invalid("delta = +1 monitor requires the bound constant"))?,
        _ => 0.0,
    };
    riccati_residuals(&series.times(), &series.f_values(), &series.q_values(), shift)
}

/// Largest `(envelope(t) − F(t))⁺` over recorded times before the pole.
pub fn monitor_envelope(series: &DiagnosticSeries, f0: f64, rate: f64) -> f64 {
    envelope_violation(&series.times(), &series.f_values(), f0, rate)
}

pub fn envelope_violation(t: &[f64], f: &[f64], f0: f64, rate: f64) -> f64 {
    t.iter()
        .zip(f)
        .filter_map(|(&t, &f)| riccati_envelope(f0, t, rate).ok().map(|e| (e - f).max(0.0)))
        .fold(0.0, f64::max)
}

/// Un-normalized local-existence time predictor: `E₀^{−1/2}` for δ = 0 and
/// `max(E₀^{−1/2}, E₀^{(γ−3)/(2(γ−1))})` for δ = ±1. Defined only up to an
/// unspecified multiplicative constant.
pub fn wellposed_lower(delta: Delta, e0: f64, gamma: f64) -> Result<f64> {
    if !(e0 > 0.0) {
        return Err(Error::invalid(format!("energy must be positive (got {e0})")));
    }
    let base = e0.powf(-0.5);
    Ok(match delta {
        Delta::Euler => base,
        _ => base.max(e0.powf((gamma - 3.0) / (2.0 * (gamma - 1.0)))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub theorem_id: TheoremId,
    pub hypotheses_ok: bool,
    pub hypotheses: HypothesisReport,
    pub predicted_upper: Option<f64>,
    pub observed_t_num: Option<f64>,
    pub min_riccati_residual: Option<f64>,
    pub envelope_violation: Option<f64>,
}

/// Evaluates hypotheses, bound and monitors for a finished run.
pub fn verdict(run: &RunResult, grid: &RadialGrid, sigma: Option<f64>) -> Result<TheoremVerdict> {
    let cfg = &run.config;
    let state0 = init_state(&run.spec, cfg, grid)?;
    let hypotheses = check_hypotheses(&state0, grid, cfg, sigma);
    let hypotheses_ok = hypotheses.all_ok();
    let f0 = hypotheses.f0;

    let bound_rhs = match (cfg.delta, sigma) {
        (Delta::Electrostatic, Some(s)) if hypotheses.gamma_window_ok == Some(true) => {
            Some(electro_bound_rhs(&state0, grid, s, cfg.gamma)?)
        }
        _ => None,
    };
    let min_riccati_residual = if run.series.len() >= 3 && (cfg.delta != Delta::Electrostatic || bound_rhs.is_some()) {
        Some(monitor_riccati(&run.series, cfg.delta, bound_rhs)?.min_residual)
    } else {
        None
    };
    let envelope = (f0 > 0.0).then(|| monitor_envelope(&run.series, f0, envelope_rate(cfg.delta)));

    Ok(TheoremVerdict {
        theorem_id: TheoremId::for_run(cfg.delta, run.spec.family),
        hypotheses_ok,
        hypotheses,
        predicted_upper: if hypotheses_ok {
            Some(lifespan_upper(cfg.delta, f0)?)
        } else {
            None
        },
        observed_t_num: run.t_num(),
        min_riccati_residual,
        envelope_violation: envelope,
    })
}
