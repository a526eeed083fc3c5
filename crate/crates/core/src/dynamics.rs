//! Finite-volume integration of the radial Euler / Euler–Poisson system.
//!
//! Conserved variables are `(ρ, ρv)` at cell centers. Interface fluxes use
//! local Lax–Friedrichs with wave speed `|v| + s(max(ρ, floor))`; time
//! integration is the two-stage SSP Runge–Kutta scheme.
//!
//! The continuity equation is differenced in area-weighted form,
//! `ρ_i' = −(A_{i+½} F_{i+½} − A_{i−½} F_{i−½}) / (r_i^{n−1} Δr)` with
//! `A = r_edge^{n−1}`, so the discrete mass `Σ |S^{n−1}| ρ_i r_i^{n−1} Δr`
//! telescopes to the flux through `r_max`. The momentum equation keeps the
//! flux of `ρv² + p` unweighted and carries the geometric term
//! `−((n−1)/r) ρv²` plus the body force `ρ a` as sources.
//!
//! Boundaries: reflecting ghost cell at `r = 0` (ρ even, v odd), zero-gradient
//! extrapolation at `r_max`.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{diagnostics, sphere_area, DiagnosticSeries};
use crate::model::{init_state, sound_speed_raw, Delta, FluidState, InitialDataSpec, ModelConfig, RadialGrid};

/// Upper bound on accepted steps in one run.
pub const MAX_STEPS: usize = 5_000_000;

/// Enclosed mass `m(r_i) = 4π Σ_{j≤i} ρ_j r_j² Δr`.
pub fn cumulative_mass(state: &FluidState, grid: &RadialGrid) -> Vec<f64> {
    enclosed_mass(&state.rho, grid)
}

fn enclosed_mass(rho: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let factor = 4.0 * PI * grid.dr();
    let mut acc = 0.0;
    rho.iter()
        .zip(grid.centers())
        .map(|(rho, r)| {
            acc += rho * r * r;
            factor * acc
        })
        .collect()
}

/// Radial body acceleration `a(r_i) = δ m(r_i) / r_i²`.
pub fn poisson_accel(state: &FluidState, grid: &RadialGrid, delta: Delta) -> Vec<f64> {
    accel_from_density(&state.rho, grid, delta)
}

fn accel_from_density(rho: &[f64], grid: &RadialGrid, delta: Delta) -> Vec<f64> {
    if delta == Delta::Euler {
        return vec![0.0; rho.len()];
    }
    let sign = delta.sign();
    enclosed_mass(rho, grid)
        .into_iter()
        .zip(grid.centers())
        .map(|(m, r)| sign * m / (r * r))
        .collect()
}

/// Time derivatives of the conserved pair on every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendencies {
    pub rho: Vec<f64>,
    pub momentum: Vec<f64>,
    /// Rate at which mass leaves through `r_max` (negative for inflow).
    pub outflow_rate: f64,
}

pub fn rhs(state: &FluidState, grid: &RadialGrid, cfg: &ModelConfig) -> Result<Tendencies> {
    state.check_on(grid)?;
    let solver = Solver::new(grid, cfg)?;
    let u = Conserved::from_state(state);
    u.check_finite(state.t)?;
    Ok(solver.tendencies(&u))
}

pub fn cfl_dt(state: &FluidState, grid: &RadialGrid, cfg: &ModelConfig) -> Result<f64> {
    state.check_on(grid)?;
    if state.rho.iter().chain(&state.v).any(|x| !x.is_finite()) {
        return Err(Error::numerical(state.t, "non-finite state in cfl_dt"));
    }
    let max_speed = state
        .rho
        .iter()
        .zip(&state.v)
        .map(|(&rho, &v)| v.abs() + sound_speed_raw(rho.max(cfg.density_floor), cfg.gamma))
        .fold(0.0, f64::max);
    Ok(timestep(max_speed, grid.dr(), cfg))
}

fn timestep(max_speed: f64, dr: f64, cfg: &ModelConfig) -> f64 {
    let cap = 0.1 * cfg.t_max;
    if max_speed > 0.0 {
        (cfg.cfl * dr / max_speed).min(cap)
    } else {
        cap
    }
}

/// One SSP-RK2 step of size `dt`.
pub fn step(state: &FluidState, grid: &RadialGrid, cfg: &ModelConfig, dt: f64) -> Result<FluidState> {
    state.check_on(grid)?;
    let solver = Solver::new(grid, cfg)?;
    let mut u = Conserved::from_state(state);
    u.check_finite(state.t)?;
    solver.advance(&mut u, dt, state.t)?;
    Ok(u.to_state(state.t + dt))
}

#[derive(Debug, Clone, PartialEq)]
struct Conserved {
    rho: Vec<f64>,
    mom: Vec<f64>,
}

impl Conserved {
    fn from_state(state: &FluidState) -> Self {
        Conserved {
            rho: state.rho.clone(),
            mom: state.rho.iter().zip(&state.v).map(|(r, v)| r * v).collect(),
        }
    }

    fn velocity(&self, i: usize) -> f64 {
        let rho = self.rho[i];
        if rho > 0.0 {
            self.mom[i] / rho
        } else {
            0.0
        }
    }

    fn to_state(&self, t: f64) -> FluidState {
        FluidState {
            rho: self.rho.clone(),
            v: (0..self.rho.len()).map(|i| self.velocity(i)).collect(),
            t,
        }
    }

    fn check_finite(&self, t: f64) -> Result<()> {
        if self.rho.iter().chain(&self.mom).any(|x| !x.is_finite()) {
            return Err(Error::numerical(t, "non-finite conserved state"));
        }
        if let Some(i) = self.rho.iter().position(|&r| r < 0.0) {
            return Err(Error::numerical(t, format!("negative density {} in cell {i}", self.rho[i])));
        }
        Ok(())
    }
}

/// Precomputed geometry for one grid and configuration.
struct Solver<'a> {
    grid: &'a RadialGrid,
    cfg: &'a ModelConfig,
    /// `r_edge^{n−1}` for every face.
    area: Vec<f64>,
    /// `1 / (r_i^{n−1} Δr)`.
    inv_volume: Vec<f64>,
    /// `(n−1) / r_i`.
    curvature: Vec<f64>,
    shell: f64,
}

/// Primitive quantities needed on either side of a face.
#[derive(Clone, Copy)]
struct FaceState {
    rho: f64,
    mom: f64,
    v: f64,
    p: f64,
    speed: f64,
}

impl<'a> Solver<'a> {
    fn new(grid: &'a RadialGrid, cfg: &'a ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let p = cfg.dim_n as i32 - 1;
        Ok(Solver {
            grid,
            cfg,
            area: grid.edges().iter().map(|e| e.powi(p)).collect(),
            inv_volume: grid.centers().iter().map(|r| 1.0 / (r.powi(p) * grid.dr())).collect(),
            curvature: grid.centers().iter().map(|r| p as f64 / r).collect(),
            shell: sphere_area(cfg.dim_n),
        })
    }

    fn face_state(&self, rho: f64, mom: f64) -> FaceState {
        let v = if rho > 0.0 { mom / rho } else { 0.0 };
        FaceState {
            rho,
            mom,
            v,
            p: if rho > 0.0 { rho.powf(self.cfg.gamma) } else { 0.0 },
            speed: v.abs() + sound_speed_raw(rho.max(self.cfg.density_floor), self.cfg.gamma),
        }
    }

    fn llf(l: &FaceState, r: &FaceState) -> (f64, f64) {
        let alpha = l.speed.max(r.speed);
        let mass = 0.5 * (l.mom + r.mom) - 0.5 * alpha * (r.rho - l.rho);
        let mom = 0.5 * (l.mom * l.v + l.p + r.mom * r.v + r.p) - 0.5 * alpha * (r.mom - l.mom);
        (mass, mom)
    }

    fn tendencies(&self, u: &Conserved) -> Tendencies {
        let n = u.rho.len();
        let cells: Vec<FaceState> = (0..n).map(|i| self.face_state(u.rho[i], u.mom[i])).collect();
        let center_ghost = self.face_state(u.rho[0], -u.mom[0]);

        let mut mass_flux = Vec::with_capacity(n + 1);
        let mut mom_flux = Vec::with_capacity(n + 1);
        let first = Self::llf(&center_ghost, &cells[0]);
        mass_flux.push(first.0);
        mom_flux.push(first.1);
        for k in 1..n {
            let (fm, fp) = Self::llf(&cells[k - 1], &cells[k]);
            mass_flux.push(fm);
            mom_flux.push(fp);
        }
        let outer = Self::llf(&cells[n - 1], &cells[n - 1]);
        mass_flux.push(outer.0);
        mom_flux.push(outer.1);

        let accel = accel_from_density(&u.rho, self.grid, self.cfg.delta);
        let dr = self.grid.dr();
        let mut d_rho = Vec::with_capacity(n);
        let mut d_mom = Vec::with_capacity(n);
        for i in 0..n {
            d_rho.push(
                -(self.area[i + 1] * mass_flux[i + 1] - self.area[i] * mass_flux[i]) * self.inv_volume[i],
            );
            let c = &cells[i];
            d_mom.push(
                -(mom_flux[i + 1] - mom_flux[i]) / dr - self.curvature[i] * c.mom * c.v + c.rho * accel[i],
            );
        }
        Tendencies {
            rho: d_rho,
            momentum: d_mom,
            outflow_rate: self.shell * self.area[n] * mass_flux[n],
        }
    }

    fn max_speed(&self, u: &Conserved) -> f64 {
        (0..u.rho.len())
            .map(|i| self.face_state(u.rho[i], u.mom[i]).speed)
            .fold(0.0, f64::max)
    }

    /// Advances `u` in place and returns the mass that left through `r_max`.
    fn advance(&self, u: &mut Conserved, dt: f64, t: f64) -> Result<f64> {
        let k1 = self.tendencies(u);
        let stage = Conserved {
            rho: u.rho.iter().zip(&k1.rho).map(|(a, d)| a + dt * d).collect(),
            mom: u.mom.iter().zip(&k1.momentum).map(|(a, d)| a + dt * d).collect(),
        };
        stage.check_finite(t + dt)?;
        let k2 = self.tendencies(&stage);
        for i in 0..u.rho.len() {
            u.rho[i] = 0.5 * u.rho[i] + 0.5 * (stage.rho[i] + dt * k2.rho[i]);
            u.mom[i] = 0.5 * u.mom[i] + 0.5 * (stage.mom[i] + dt * k2.momentum[i]);
        }
        u.check_finite(t + dt)?;
        Ok(0.5 * dt * (k1.outflow_rate + k2.outflow_rate))
    }
}

/// Outcome of the gradient-threshold blow-up detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub detected: bool,
    pub t_detect: Option<f64>,
    pub t_extrapolated: Option<f64>,
    pub criterion: String,
    /// `(t, W(t))` pairs.
    pub max_gradient_history: Vec<(f64, f64)>,
}

/// Flags blow-up once `W(t) ≥ factor · W_ref`, where `W_ref` is the first
/// positive entry of the history, and extrapolates the singular time from a
/// least-squares line through `1/W` over the last quarter of the samples
/// preceding the crossing.
pub fn detect_blowup(history: &[(f64, f64)], factor: f64) -> BlowupReport {
    let not_detected = |criterion: &str| BlowupReport {
        detected: false,
        t_detect: None,
        t_extrapolated: None,
        criterion: criterion.to_string(),
        max_gradient_history: history.to_vec(),
    };
    let Some(ref_idx) = history.iter().position(|&(_, w)| w > 0.0) else {
        return not_detected("none");
    };
    let threshold = factor * history[ref_idx].1;
    let Some(k) = history
        .iter()
        .skip(ref_idx + 1)
        .position(|&(_, w)| w >= threshold)
        .map(|p| p + ref_idx + 1)
    else {
        return not_detected("none");
    };

    let n_fit = (k / 4).max(2).min(k);
    let window = &history[k - n_fit..k];
    let t_extrapolated = if n_fit >= 2 {
        let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = window.iter().map(|p| 1.0 / p.1).collect();
        linear_fit(&xs, &ys).and_then(|(slope, intercept)| (slope < 0.0).then(|| -intercept / slope))
    } else {
        None
    };
    BlowupReport {
        detected: true,
        t_detect: Some(history[k].0),
        t_extrapolated,
        criterion: format!("max_gradient >= {factor} * W_ref"),
        max_gradient_history: history.to_vec(),
    }
}

/// Ordinary least squares `y ≈ slope · x + intercept`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: ModelConfig,
    pub spec: InitialDataSpec,
    pub n_cells: usize,
    pub r_max: f64,
    pub series: DiagnosticSeries,
    pub blowup: BlowupReport,
    /// `max_t |M(t) + outflow(t) − M(0)| / M(0)`.
    pub mass_drift: f64,
    #[serde(skip)]
    pub wall_time: f64,
}

impl RunResult {
    pub fn t_num(&self) -> Option<f64> {
        self.blowup.t_detect
    }
}

/// Integrates to `t_max` or until the detector fires, recording diagnostics
/// after every accepted step.
pub fn run(cfg: &ModelConfig, spec: &InitialDataSpec, grid: &RadialGrid) -> Result<RunResult> {
    let started = Instant::now();
    let state0 = init_state(spec, cfg, grid)?;
    let solver = Solver::new(grid, cfg)?;
    let with_sobolev = grid.n_cells() >= 8;

    let mut series = DiagnosticSeries::default();
    let rec0 = diagnostics(&state0, grid, cfg, 0.0, with_sobolev)?;
    let w_ref = rec0.w;
    let mut history = vec![(0.0, rec0.w)];
    series.records.push(rec0);

    let mut u = Conserved::from_state(&state0);
    let mut t = 0.0;
    let mut outflow = 0.0;
    let mut w_threshold = (w_ref > 0.0).then_some(cfg.blowup_gradient_factor * w_ref);
    let mut steps = 0usize;

    let fail = |err: Error, series: &DiagnosticSeries| match err {
        Error::NumericalFailure { t, reason, .. } => Error::NumericalFailure {
            t,
            reason,
            partial: Some(Box::new(series.clone())),
        },
        other => other,
    };

    while t < cfg.t_max {
        if steps >= MAX_STEPS {
            return Err(fail(Error::numerical(t, "step limit exceeded"), &series));
        }
        let remaining = cfg.t_max - t;
        let mut dt = timestep(solver.max_speed(&u), grid.dr(), cfg);
        if dt >= remaining {
            dt = remaining;
        }
        if !(dt > 0.0) || t + dt == t {
            return Err(fail(Error::numerical(t, format!("timestep collapsed to {dt}")), &series));
        }
        match solver.advance(&mut u, dt, t) {
            Ok(out) => outflow += out,
            Err(e) => return Err(fail(e, &series)),
        }
        t = if dt == remaining { cfg.t_max } else { t + dt };
        steps += 1;

        let state = u.to_state(t);
        let rec = diagnostics(&state, grid, cfg, outflow, false).map_err(|e| fail(e, &series))?;
        let w = rec.w;
        history.push((t, w));
        series.records.push(rec);

        match w_threshold {
            Some(th) if w >= th => break,
            None if w > 0.0 => w_threshold = Some(cfg.blowup_gradient_factor * w),
            _ => {}
        }
    }

    let blowup = detect_blowup(&history, cfg.blowup_gradient_factor);
    let m0 = series.records[0].mass;
    let mass_drift = if m0 > 0.0 {
        series
            .records
            .iter()
            .map(|r| (r.mass + r.mass_outflow - m0).abs() / m0)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(RunResult {
        config: cfg.clone(),
        spec: spec.clone(),
        n_cells: grid.n_cells(),
        r_max: grid.r_max(),
        series,
        blowup,
        mass_drift,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::mass_in_dim;
    use crate::model::{make_grid, Family};
    use approx::assert_relative_eq;

    fn uniform(grid: &RadialGrid, rho: f64) -> FluidState {
        FluidState {
            rho: vec![rho; grid.n_cells()],
            v: vec![0.0; grid.n_cells()],
            t: 0.0,
        }
    }

    #[test]
    fn enclosed_mass_cases() {
        let grid = make_grid(1.0, 2000).unwrap();
        assert!(cumulative_mass(&FluidState::vacuum(&grid), &grid).iter().all(|&m| m == 0.0));

        let m = cumulative_mass(&uniform(&grid, 2.0), &grid);
        assert!(m.windows(2).all(|w| w[1] >= w[0]));
        assert_relative_eq!(*m.last().unwrap(), 4.0 * PI / 3.0 * 2.0, max_relative = 1e-6);

        let grid = make_grid(60.0, 60_000).unwrap();
        let s = FluidState {
            rho: grid.centers().iter().map(|r| (-r).exp()).collect(),
            v: vec![0.0; grid.n_cells()],
            t: 0.0,
        };
        assert_relative_eq!(*cumulative_mass(&s, &grid).last().unwrap(), 8.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn poisson_acceleration_signs() {
        let grid = make_grid(1.0, 1000).unwrap();
        let s = uniform(&grid, 1.0);
        assert!(poisson_accel(&s, &grid, Delta::Euler).iter().all(|&a| a == 0.0));
        let a = poisson_accel(&s, &grid, Delta::Gravity);
        // prefix sums include the whole cell i, an O(Δr/r) excess
        for (ai, r) in a.iter().zip(grid.centers()).skip(300) {
            assert_relative_eq!(*ai, -4.0 * PI / 3.0 * r, max_relative = 1e-2);
        }
        assert!(poisson_accel(&s, &grid, Delta::Electrostatic).iter().all(|&a| a > 0.0));
        assert!(a[0].abs() < 2e-2);
    }

    #[test]
    fn steady_and_vacuum_tendencies() {
        let grid = make_grid(5.0, 64).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let t = rhs(&uniform(&grid, 0.7), &grid, &cfg).unwrap();
        assert!(t.rho.iter().chain(&t.momentum).all(|&x| x.abs() < 1e-14));

        let t = rhs(&FluidState::vacuum(&grid), &grid, &cfg).unwrap();
        assert!(t.rho.iter().chain(&t.momentum).all(|&x| x == 0.0));

        let grav = ModelConfig::new(1.4, Delta::Gravity);
        let t = rhs(&uniform(&grid, 0.7), &grid, &grav).unwrap();
        assert!(t.rho.iter().all(|&x| x.abs() < 1e-14));
        assert!(t.momentum.iter().all(|&x| x < 0.0));
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let grid = make_grid(5.0, 16).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let mut s = uniform(&grid, 1.0);
        s.v[3] = f64::NAN;
        assert!(matches!(rhs(&s, &grid, &cfg), Err(Error::NumericalFailure { .. })));
    }

    #[test]
    fn cfl_timestep() {
        let grid = make_grid(1.0, 100).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let dt = cfl_dt(&uniform(&grid, 1.0), &grid, &cfg).unwrap();
        assert_relative_eq!(dt, 0.004 / 1.4f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(dt, 0.003381, epsilon = 1e-6);

        let mut fast = FluidState::vacuum(&grid);
        fast.v[5] = 1e3;
        let dt1 = cfl_dt(&fast, &grid, &cfg).unwrap();
        fast.v[5] = 2e3;
        let dt2 = cfl_dt(&fast, &grid, &cfg).unwrap();
        assert_relative_eq!(dt1 / dt2, 2.0, max_relative = 1e-5);

        let cfg = cfg.with_t_max(1e-3);
        assert_eq!(cfl_dt(&FluidState::vacuum(&grid), &grid, &cfg).unwrap(), 1e-4);
    }

    #[test]
    fn fixed_points_of_step() {
        let grid = make_grid(5.0, 64).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let vac = FluidState::vacuum(&grid);
        let next = step(&vac, &grid, &cfg, 0.01).unwrap();
        assert_eq!(next.rho, vac.rho);
        assert_eq!(next.v, vac.v);

        let s = uniform(&grid, 1.3);
        let next = step(&s, &grid, &cfg, 0.01).unwrap();
        for (a, b) in next.rho.iter().zip(&s.rho) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(next.v.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn interior_mass_telescopes() {
        let grid = make_grid(20.0, 512).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let solver = Solver::new(&grid, &cfg).unwrap();
        let s0 = init_state(&InitialDataSpec::new(Family::Base, 1.0), &cfg, &grid).unwrap();
        let m0 = mass_in_dim(&s0, &grid, 3);
        let mut u = Conserved::from_state(&s0);
        let mut out = 0.0;
        for _ in 0..1000 {
            let dt = timestep(solver.max_speed(&u), grid.dr(), &cfg);
            out += solver.advance(&mut u, dt, 0.0).unwrap();
        }
        let m = mass_in_dim(&u.to_state(0.0), &grid, 3);
        assert!(((m + out) - m0).abs() / m0 < 1e-12, "drift {}", ((m + out) - m0).abs() / m0);
    }

    #[test]
    fn detector_on_synthetic_singularity() {
        let n = 1000;
        let history: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = 0.99 * k as f64 / (n - 1) as f64;
                (t, 1.0 / (1.0 - t))
            })
            .collect();
        let rep = detect_blowup(&history, 50.0);
        assert!(rep.detected);
        assert!(rep.t_detect.unwrap() >= 0.98);
        assert_relative_eq!(rep.t_extrapolated.unwrap(), 1.0, epsilon = 0.01);
        assert!(rep.t_detect.unwrap() <= rep.t_extrapolated.unwrap() + 0.01);

        let flat: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, 3.0)).collect();
        assert!(!detect_blowup(&flat, 50.0).detected);
        let decay: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, (-(k as f64)).exp())).collect();
        let rep = detect_blowup(&decay, 50.0);
        assert!(!rep.detected && rep.t_detect.is_none() && rep.t_extrapolated.is_none());
    }

    #[test]
    fn vacuum_run_reaches_horizon() {
        let grid = make_grid(20.0, 64).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler).with_t_max(1.0);
        let spec = InitialDataSpec::table(vec![[0.0, 0.0, 0.0], [20.0, 0.0, 0.0]]);
        let res = run(&cfg, &spec, &grid).unwrap();
        assert!(!res.blowup.detected);
        assert_eq!(res.series.last().unwrap().t, 1.0);
        for r in &res.series.records {
            assert_eq!((r.mass, r.e_delta, r.f, r.q, r.w), (0.0, 0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let grid = make_grid(20.0, 128).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Gravity).with_t_max(2.0);
        let spec = InitialDataSpec::new(Family::Base, 1.0);
        let a = run(&cfg, &spec, &grid).unwrap();
        let b = run(&cfg, &spec, &grid).unwrap();
        assert_eq!(a.series, b.series);
        assert!(a.series.times().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(a.series.first().unwrap().t, 0.0);
    }
}
