//! Averaged quantities evaluated on a [`FluidState`] by midpoint quadrature.
//!
//! `F` and `Q` share the weights `w_i = e^{−r_i} Δr`. Since `e^{−r}` is
//! convex the midpoint sum `Σ w_i` stays below 1, so the finite-sum
//! Cauchy–Schwarz inequality gives `F² ≤ 2 Q Σ w_i ≤ 2 Q` exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::cumulative_mass;
use crate::error::{Error, Result};
use crate::model::{sound_speed_raw, Delta, FluidState, ModelConfig, RadialGrid};

/// One row of the time series recorded along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "E_delta")]
    pub e_delta: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "E_sobolev")]
    pub e_sobolev: Option<f64>,
    /// Mass that has left through `r = r_max` since `t = 0`.
    pub mass_outflow: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    pub fn q_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.q).collect()
    }

    pub fn first(&self) -> Option<&DiagnosticRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&DiagnosticRecord> {
        self.records.last()
    }
}

/// Surface measure of the unit sphere in `R^n`.
pub fn sphere_area(dim_n: u32) -> f64 {
    let half = dim_n as f64 / 2.0;
    2.0 * PI.powf(half) / statrs::function::gamma::gamma(half)
}

/// `M = 4π Σ ρ_i r_i² Δr`.
pub fn mass(state: &FluidState, grid: &RadialGrid) -> f64 {
    mass_in_dim(state, grid, 3)
}

/// Mass for a radial flow in `n` dimensions, `|S^{n−1}| Σ ρ_i r_i^{n−1} Δr`.
pub fn mass_in_dim(state: &FluidState, grid: &RadialGrid, dim_n: u32) -> f64 {
    let p = dim_n as i32 - 1;
    let sum: f64 = state
        .rho
        .iter()
        .zip(grid.centers())
        .map(|(rho, r)| rho * r.powi(p))
        .sum();
    sphere_area(dim_n) * sum * grid.dr()
}

/// `K(l, r) = 1 / max(l, r)`.
pub fn kernel_k(l: f64, r: f64) -> Result<f64> {
    if !(l > 0.0 && r > 0.0) {
        return Err(Error::invalid(format!(
            "kernel arguments must be positive (got l = {l}, r = {r})"
        )));
    }
    Ok(1.0 / l.max(r))
}

/// Kinetic, internal and (unsigned) interaction parts of the physical energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub internal: f64,
    /// `8π² ∫∫ K(l, r) ρ(l) ρ(r) l² r² dl dr`, always nonnegative.
    pub interaction: f64,
}

impl EnergyParts {
    pub fn total(&self, delta: Delta) -> f64 {
        self.kinetic + self.internal + delta.sign() * self.interaction
    }
}

pub fn energy_parts(state: &FluidState, grid: &RadialGrid, gamma: f64) -> EnergyParts {
    let dr = grid.dr();
    let mut kinetic = 0.0;
    let mut internal = 0.0;
    for ((&rho, &v), &r) in state.rho.iter().zip(&state.v).zip(grid.centers()) {
        let r2 = r * r;
        kinetic += 0.5 * rho * v * v * r2;
        internal += rho.powf(gamma) * r2;
    }
    let kinetic = 4.0 * PI * kinetic * dr;
    let internal = 4.0 * PI * internal * dr / (gamma - 1.0);

    // Σ_i ρ_i r_i² [ (1/r_i) Σ_{j≤i} ρ_j r_j² + Σ_{j>i} ρ_j r_j ] Δr²
    let n = grid.n_cells();
    let centers = grid.centers();
    let mut outer_tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        outer_tail[i] = outer_tail[i + 1] + state.rho[i] * centers[i];
    }
    let mut inner = 0.0;
    let mut double = 0.0;
    for i in 0..n {
        let w = state.rho[i] * centers[i] * centers[i];
        inner += w;
        double += w * (inner / centers[i] + outer_tail[i + 1]);
    }
    let interaction = 8.0 * PI * PI * double * dr * dr;
    EnergyParts {
        kinetic,
        internal,
        interaction,
    }
}

/// `E_δ` with the O(N) prefix-sum evaluation of the interaction double integral.
pub fn physical_energy(state: &FluidState, grid: &RadialGrid, gamma: f64, delta: Delta) -> f64 {
    energy_parts(state, grid, gamma).total(delta)
}

/// `E_δ` with the interaction term summed directly over all cell pairs. O(N²).
pub fn physical_energy_direct(state: &FluidState, grid: &RadialGrid, gamma: f64, delta: Delta) -> f64 {
    let parts = energy_parts(state, grid, gamma);
    let c = grid.centers();
    let mut double = 0.0;
    for i in 0..c.len() {
        let wi = state.rho[i] * c[i] * c[i];
        if wi == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..c.len() {
            row += 1.0 / c[i].max(c[j]) * state.rho[j] * c[j] * c[j];
        }
        double += wi * row;
    }
    let interaction = 8.0 * PI * PI * double * grid.dr() * grid.dr();
    parts.kinetic + parts.internal + delta.sign() * interaction
}

/// `F = −Σ v_i e^{−r_i} Δr`.
pub fn f_functional(state: &FluidState, grid: &RadialGrid) -> f64 {
    -state
        .v
        .iter()
        .zip(grid.centers())
        .map(|(v, r)| v * (-r).exp())
        .sum::<f64>()
        * grid.dr()
}

/// `Q = ½ Σ v_i² e^{−r_i} Δr`.
pub fn q_functional(state: &FluidState, grid: &RadialGrid) -> f64 {
    0.5 * state
        .v
        .iter()
        .zip(grid.centers())
        .map(|(v, r)| v * v * (-r).exp())
        .sum::<f64>()
        * grid.dr()
}

/// `R = Σ m(r_i) r_i^{−2} e^{−r_i} Δr` with `m` the enclosed mass.
pub fn r_functional(state: &FluidState, grid: &RadialGrid) -> f64 {
    cumulative_mass(state, grid)
        .iter()
        .zip(grid.centers())
        .map(|(m, r)| m / (r * r) * (-r).exp())
        .sum::<f64>()
        * grid.dr()
}

/// `R` as an explicit double sum, O(N²).
pub fn r_functional_direct(state: &FluidState, grid: &RadialGrid) -> f64 {
    let c = grid.centers();
    let dr = grid.dr();
    let mut total = 0.0;
    for i in 0..c.len() {
        let mut enclosed = 0.0;
        for (rho, r) in state.rho[..=i].iter().zip(c) {
            enclosed += 4.0 * PI * rho * r * r * dr;
        }
        total += enclosed / (c[i] * c[i]) * (-c[i]).exp() * dr;
    }
    total
}

/// Largest one-cell velocity gradient `max_i |v_{i+1} − v_i| / Δr`.
pub fn max_gradient(state: &FluidState, grid: &RadialGrid) -> f64 {
    state
        .v
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
        / grid.dr()
}

/// The pair `(c₁, c₂)` of the electrostatic bound, for `σ ∈ (0, 1/2)`.
pub fn constants_c1_c2(sigma: f64) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    let p = (3.0 - sigma) / (2.0 - sigma);
    let c1 = (2.0 - sigma) / (3.0 - sigma) * ((3.0 - sigma) / (3.0 - 3.0 * sigma + sigma * sigma)).powf(p);
    let c2 = 4.0 * PI * (-1.0f64).exp() * (1.0 + sigma) / (sigma * (3.0 - sigma));
    Ok((c1, c2))
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(Error::invalid(format!("sigma must lie in (0, 1/2) (got {sigma})")));
    }
    Ok(())
}

/// Checks the admissible window `(3−σ)/(2−σ) < γ ≤ 5/3`.
pub(crate) fn check_gamma_window(sigma: f64, gamma: f64) -> Result<()> {
    check_sigma(sigma)?;
    let lower = (3.0 - sigma) / (2.0 - sigma);
    if !(gamma > lower && gamma <= 5.0 / 3.0 + 1e-15) {
        return Err(Error::hypothesis(format!(
            "gamma = {gamma} outside the window ({lower}, 5/3] required for sigma = {sigma}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargenessCondition {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl LargenessCondition {
    pub fn margin(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Largeness condition `F(0)²/4 ≥ c₁ (M(0) + (γ−1) E₁(0)) + c₂`.
pub fn largeness_condition(state0: &FluidState, grid: &RadialGrid, sigma: f64, gamma: f64) -> Result<LargenessCondition> {
    check_gamma_window(sigma, gamma)?;
    let f0 = f_functional(state0, grid);
    let lhs = 0.25 * f0 * f0;
    let rhs = electro_bound_rhs(state0, grid, sigma, gamma)?;
    Ok(LargenessCondition {
        holds: lhs >= rhs,
        lhs,
        rhs,
    })
}

/// `c₁ (M + (γ−1) E₁) + c₂` evaluated on `state`.
pub fn electro_bound_rhs(state: &FluidState, grid: &RadialGrid, sigma: f64, gamma: f64) -> Result<f64> {
    let (c1, c2) = constants_c1_c2(sigma)?;
    let m = mass(state, grid);
    let e1 = physical_energy(state, grid, gamma, Delta::Electrostatic);
    Ok(c1 * (m + (gamma - 1.0) * e1) + c2)
}

/// Radial-derivative surrogate of the order-3 Sobolev energy of `(ζ, v)`:
/// `Σ_{k=0}^{3} Σ_i (|D^k ζ|² + |D^k v|²) r_i² Δr` with central differences.
///
/// Ghost values mirror `ζ` evenly and `v` oddly through the center and
/// extend both constantly past `r_max`.
pub fn sobolev_surrogate_energy(state: &FluidState, grid: &RadialGrid, gamma: f64) -> Result<f64> {
    if grid.n_cells() < 8 {
        return Err(Error::invalid("sobolev surrogate needs at least 8 cells"));
    }
    if !(gamma > 1.0) {
        return Err(Error::invalid(format!("gamma must exceed 1 (got {gamma})")));
    }
    state.check_on(grid)?;
    if state.rho.iter().any(|&r| r < 0.0) {
        return Err(Error::invalid("negative density in sobolev surrogate"));
    }
    let zeta: Vec<f64> = state
        .rho
        .iter()
        .map(|&rho| 2.0 / (gamma - 1.0) * sound_speed_raw(rho, gamma))
        .collect();
    let h = grid.dr();
    Ok(derivative_energy(&zeta, 1.0, grid, h) + derivative_energy(&state.v, -1.0, grid, h))
}

const GHOSTS: usize = 3;

fn derivative_energy(values: &[f64], parity: f64, grid: &RadialGrid, h: f64) -> f64 {
    let n = values.len();
    let mut p = Vec::with_capacity(n + 2 * GHOSTS);
    for k in (0..GHOSTS).rev() {
        p.push(parity * values[k]);
    }
    p.extend_from_slice(values);
    let last = values[n - 1];
    p.extend(std::iter::repeat_n(last, GHOSTS));

    let mut total = 0.0;
    for (i, &r) in grid.centers().iter().enumerate() {
        let j = i + GHOSTS;
        let f0 = p[j];
        let d1 = (p[j + 1] - p[j - 1]) / (2.0 * h);
        let d2 = (p[j + 1] - 2.0 * f0 + p[j - 1]) / (h * h);
        let d3 = (p[j + 2] - 2.0 * p[j + 1] + 2.0 * p[j - 1] - p[j - 2]) / (2.0 * h * h * h);
        total += (f0 * f0 + d1 * d1 + d2 * d2 + d3 * d3) * r * r;
    }
    total * h
}

/// All monitors for one state. `e_sobolev` is only evaluated when requested.
pub fn diagnostics(
    state: &FluidState,
    grid: &RadialGrid,
    cfg: &ModelConfig,
    mass_outflow: f64,
    with_sobolev: bool,
) -> Result<DiagnosticRecord> {
    let e_sobolev = if with_sobolev {
        Some(sobolev_surrogate_energy(state, grid, cfg.gamma)?)
    } else {
        None
    };
    Ok(DiagnosticRecord {
        t: state.t,
        mass: mass_in_dim(state, grid, cfg.dim_n),
        e_delta: physical_energy(state, grid, cfg.gamma, cfg.delta),
        f: f_functional(state, grid),
        q: q_functional(state, grid),
        r: (cfg.delta == Delta::Electrostatic).then(|| r_functional(state, grid)),
        w: max_gradient(state, grid),
        e_sobolev,
        mass_outflow,
    })
}
