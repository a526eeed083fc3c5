//! Grids, states, model configuration, the polytropic closure and the
//! Gaussian-type initial-data families.
//!
//! Pressure is `p = ρ^γ` (unit constant), the sound speed is
//! `s = √(γ ρ^{γ−1})` and the symmetrizing variable is `ζ = 2 s / (γ − 1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default outer radius of the computational domain.
pub const DEFAULT_R_MAX: f64 = 20.0;

/// Default density floor used inside wave-speed evaluation only.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-14;

/// Uniform cell-centered grid on `(0, r_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    n_cells: usize,
    dr: f64,
    centers: Vec<f64>,
    edges: Vec<f64>,
}

impl RadialGrid {
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
}

/// Builds the uniform grid with `centers[i] = (i + 1/2) dr`, `dr = r_max / n_cells`.
pub fn make_grid(r_max: f64, n_cells: usize) -> Result<RadialGrid> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
    }
    if n_cells == 0 {
        return Err(Error::invalid("n_cells must be at least 1"));
    }
    let dr = r_max / n_cells as f64;
    let centers = (0..n_cells).map(|i| (i as f64 + 0.5) * dr).collect();
    let mut edges: Vec<f64> = (0..=n_cells).map(|i| i as f64 * dr).collect();
    edges[n_cells] = r_max;
    Ok(RadialGrid {
        r_max,
        n_cells,
        dr,
        centers,
        edges,
    })
}

/// Sign of the self-interaction: `+1` electrostatic (repulsive), `−1`
/// gravitational (attractive), `0` pure Euler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Delta {
    Gravity,
    Euler,
    Electrostatic,
}

impl Delta {
    pub fn sign(self) -> f64 {
        match self {
            Delta::Gravity => -1.0,
            Delta::Euler => 0.0,
            Delta::Electrostatic => 1.0,
        }
    }
}

impl TryFrom<i32> for Delta {
    type Error = String;

    fn try_from(v: i32) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Delta::Gravity),
            0 => Ok(Delta::Euler),
            1 => Ok(Delta::Electrostatic),
            other => Err(format!("delta must be one of -1, 0, 1 (got {other})")),
        }
    }
}

impl From<Delta> for i32 {
    fn from(d: Delta) -> i32 {
        match d {
            Delta::Gravity => -1,
            Delta::Euler => 0,
            Delta::Electrostatic => 1,
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i32::from(*self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub gamma: f64,
    pub delta: Delta,
    pub dim_n: u32,
    pub cfl: f64,
    pub density_floor: f64,
    pub blowup_gradient_factor: f64,
    pub t_max: f64,
}

impl ModelConfig {
    /// Three-dimensional configuration with default numerical parameters.
    pub fn new(gamma: f64, delta: Delta) -> Self {
        ModelConfig {
            gamma,
            delta,
            dim_n: 3,
            cfl: 0.4,
            density_floor: DEFAULT_DENSITY_FLOOR,
            blowup_gradient_factor: 10.0,
            t_max: 50.0,
        }
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_dim(mut self, dim_n: u32) -> Self {
        self.dim_n = dim_n;
        self
    }

    pub fn with_blowup_factor(mut self, factor: f64) -> Self {
        self.blowup_gradient_factor = factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::invalid(format!(
                "gamma must exceed 1 (got {})",
                self.gamma
            )));
        }
        if self.delta != Delta::Euler {
            if self.dim_n != 3 {
                return Err(Error::invalid(format!(
                    "dim_n must be 3 when delta != 0 (got {})",
                    self.dim_n
                )));
            }
            if self.gamma > 5.0 / 3.0 + 1e-15 {
                return Err(Error::invalid(format!(
                    "gamma must not exceed 5/3 when delta != 0 (got {})",
                    self.gamma
                )));
            }
        }
        if self.dim_n < 2 {
            return Err(Error::invalid(format!(
                "dim_n must be at least 2 (got {})",
                self.dim_n
            )));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::invalid(format!(
                "cfl must lie in (0, 1) (got {})",
                self.cfl
            )));
        }
        if !(self.density_floor > 0.0 && self.density_floor.is_finite()) {
            return Err(Error::invalid("density_floor must be positive"));
        }
        if !(self.blowup_gradient_factor > 0.0 && self.blowup_gradient_factor.is_finite()) {
            return Err(Error::invalid("blowup_gradient_factor must be positive"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid(format!(
                "t_max must be positive (got {})",
                self.t_max
            )));
        }
        Ok(())
    }
}

/// Density and radial velocity sampled at cell centers at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl FluidState {
    pub fn vacuum(grid: &RadialGrid) -> Self {
        FluidState {
            rho: vec![0.0; grid.n_cells()],
            v: vec![0.0; grid.n_cells()],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub(crate) fn check_on(&self, grid: &RadialGrid) -> Result<()> {
        if self.rho.len() != grid.n_cells() || self.v.len() != grid.n_cells() {
            return Err(Error::invalid(format!(
                "state has {}/{} samples but grid has {} cells",
                self.rho.len(),
                self.v.len(),
                grid.n_cells()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `(ϱ, w)` unscaled.
    Base,
    /// `(ε^{2/(γ−1)} ϱ, ε w)`: both sound speed and velocity scale like `ε`.
    SharpScaling,
    /// `(ε ϱ, ε⁻¹ w)`: kinetic energy dominates for small `ε`.
    ElectroScaling,
    /// Explicit `(r, ρ, v)` samples, linearly interpolated.
    Table,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Base => "base",
            Family::SharpScaling => "sharp_scaling",
            Family::ElectroScaling => "electro_scaling",
            Family::Table => "table",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub family: Family,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 3]>>,
}

impl InitialDataSpec {
    pub fn new(family: Family, eps: f64) -> Self {
        InitialDataSpec {
            family,
            eps,
            table: None,
        }
    }

    pub fn table(samples: Vec<[f64; 3]>) -> Self {
        InitialDataSpec {
            family: Family::Table,
            eps: 1.0,
            table: Some(samples),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(format!("eps must be positive (got {})", self.eps)));
        }
        if self.family == Family::Table {
            let table = self
                .table
                .as_ref()
                .ok_or_else(|| Error::invalid("table family requires samples"))?;
            if table.len() < 2 {
                return Err(Error::invalid("table needs at least two samples"));
            }
            if table.windows(2).any(|w| w[1][0] <= w[0][0]) {
                return Err(Error::invalid("table radii must be strictly increasing"));
            }
            if table.iter().any(|s| s.iter().any(|x| !x.is_finite()) || s[1] < 0.0) {
                return Err(Error::invalid("table samples must be finite with rho >= 0"));
            }
            let first = table[0];
            if first[0] != 0.0 || first[1] != 0.0 || first[2] != 0.0 {
                return Err(Error::hypothesis(format!(
                    "table data must start at r = 0 with rho = 0 and v = 0 (got r = {}, rho = {}, v = {})",
                    first[0], first[1], first[2]
                )));
            }
        }
        Ok(())
    }
}

/// The Gaussian profile pair: `(r² e^{−r²}, −r³ e^{−r²})`.
pub fn base_profile(r: f64) -> (f64, f64) {
    let g = (-r * r).exp();
    (r * r * g, -r * r * r * g)
}

pub fn init_state(spec: &InitialDataSpec, cfg: &ModelConfig, grid: &RadialGrid) -> Result<FluidState> {
    spec.validate()?;
    cfg.validate()?;
    let (rho_scale, v_scale) = match spec.family {
        Family::Base | Family::Table => (1.0, 1.0),
        Family::SharpScaling => (spec.eps.powf(2.0 / (cfg.gamma - 1.0)), spec.eps),
        Family::ElectroScaling => (spec.eps, 1.0 / spec.eps),
    };
    let (rho, v) = match spec.family {
        Family::Table => {
            let table = spec.table.as_deref().unwrap_or_default();
            grid.centers().iter().map(|&r| interpolate(table, r)).unzip()
        }
        _ => grid
            .centers()
            .iter()
            .map(|&r| {
                let (rho, v) = base_profile(r);
                (rho_scale * rho, v_scale * v)
            })
            .unzip(),
    };
    Ok(FluidState { rho, v, t: 0.0 })
}

fn interpolate(table: &[[f64; 3]], r: f64) -> (f64, f64) {
    let last = table[table.len() - 1];
    if r >= last[0] {
        return (0.0, 0.0);
    }
    let k = table.partition_point(|s| s[0] <= r).max(1);
    let (a, b) = (table[k - 1], table[k]);
    let w = (r - a[0]) / (b[0] - a[0]);
    (a[1] + w * (b[1] - a[1]), a[2] + w * (b[2] - a[2]))
}

pub fn pressure(rho: f64, gamma: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::invalid(format!("negative density {rho}")));
    }
    Ok(rho.powf(gamma))
}

pub fn sound_speed(rho: f64, gamma: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::invalid(format!("negative density {rho}")));
    }
    Ok(sound_speed_raw(rho, gamma))
}

pub fn zeta_of_rho(rho: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::invalid(format!("gamma must exceed 1 (got {gamma})")));
    }
    Ok(2.0 / (gamma - 1.0) * sound_speed(rho, gamma)?)
}

#[inline]
pub(crate) fn sound_speed_raw(rho: f64, gamma: f64) -> f64 {
    if rho <= 0.0 {
        0.0
    } else {
        (gamma * rho.powf(gamma - 1.0)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(20.0, 4).unwrap();
        assert_eq!(g.centers(), &[2.5, 7.5, 12.5, 17.5]);
        assert_eq!(g.dr(), 5.0);
        assert_eq!(g.edges(), &[0.0, 5.0, 10.0, 15.0, 20.0]);

        let g = make_grid(1.0, 1).unwrap();
        assert_eq!(g.centers(), &[0.5]);
        assert_eq!(g.edges(), &[0.0, 1.0]);

        let g = make_grid(20.0, 4096).unwrap();
        assert_eq!(g.dr(), 0.0048828125);
        assert_eq!(*g.edges().last().unwrap(), 20.0);
        assert!(g.centers().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(matches!(make_grid(0.0, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(-1.0, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(1.0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn profile_values() {
        assert_eq!(base_profile(0.0), (0.0, 0.0));
        let (rho, v) = base_profile(1.0);
        assert_relative_eq!(rho, 0.36787944117144233, max_relative = 1e-15);
        assert_relative_eq!(v, -0.36787944117144233, max_relative = 1e-15);
        let (rho, v) = base_profile(40.0);
        assert_eq!((rho, v), (0.0, -0.0));
    }

    #[test]
    fn closures() {
        assert_eq!(sound_speed(0.0, 1.4).unwrap(), 0.0);
        assert_relative_eq!(sound_speed(1.0, 1.4).unwrap(), 1.4f64.sqrt());
        assert_relative_eq!(sound_speed(1.0, 1.4).unwrap(), 1.183216, epsilon = 1e-6);
        assert_relative_eq!(sound_speed(4.0, 5.0 / 3.0).unwrap(), 2.049_325_946_008_324, epsilon = 1e-12);
        assert!(sound_speed(-1.0, 1.4).is_err());

        assert_eq!(zeta_of_rho(0.0, 1.4).unwrap(), 0.0);
        assert_relative_eq!(zeta_of_rho(1.0, 5.0 / 3.0).unwrap(), 3.872983, epsilon = 1e-6);
        assert!(zeta_of_rho(1.0, 1.0).is_err());

        assert_eq!(pressure(0.0, 1.4).unwrap(), 0.0);
        assert_eq!(pressure(1.0, 1.7).unwrap(), 1.0);
        assert_relative_eq!(pressure(2.0, 1.4).unwrap(), 2.639016, epsilon = 1e-6);
        assert!(pressure(-0.5, 1.4).is_err());
    }

    #[test]
    fn zeta_scales_linearly_under_sharp_scaling() {
        let gamma = 1.4;
        let eps: f64 = 0.3;
        for &rho in &[0.01, 0.5, 2.0] {
            let scaled = zeta_of_rho(eps.powf(2.0 / (gamma - 1.0)) * rho, gamma).unwrap();
            assert_relative_eq!(scaled, eps * zeta_of_rho(rho, gamma).unwrap(), max_relative = 1e-13);
        }
    }

    #[test]
    fn scaling_families() {
        let grid = make_grid(20.0, 256).unwrap();
        let cfg = ModelConfig::new(5.0 / 3.0, Delta::Euler);
        let base = init_state(&InitialDataSpec::new(Family::Base, 1.0), &cfg, &grid).unwrap();
        let unit = init_state(&InitialDataSpec::new(Family::SharpScaling, 1.0), &cfg, &grid).unwrap();
        assert_eq!(base, unit);

        let s = init_state(&InitialDataSpec::new(Family::SharpScaling, 0.1), &cfg, &grid).unwrap();
        for i in 0..grid.n_cells() {
            assert_relative_eq!(s.rho[i], 1e-3 * base.rho[i], max_relative = 1e-12);
            assert_relative_eq!(s.v[i], 0.1 * base.v[i], max_relative = 1e-12);
        }

        let e = init_state(&InitialDataSpec::new(Family::ElectroScaling, 0.01), &cfg, &grid).unwrap();
        for i in 0..grid.n_cells() {
            assert_relative_eq!(e.rho[i], 1e-2 * base.rho[i], max_relative = 1e-12);
            assert_relative_eq!(e.v[i], 1e2 * base.v[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn table_family() {
        let grid = make_grid(2.0, 8).unwrap();
        let cfg = ModelConfig::new(1.4, Delta::Euler);
        let spec = InitialDataSpec::table(vec![[0.0, 0.0, 0.0], [1.0, 1.0, -1.0], [2.0, 0.0, 0.0]]);
        let s = init_state(&spec, &cfg, &grid).unwrap();
        assert_relative_eq!(s.rho[0], 0.125);
        assert_relative_eq!(s.v[0], -0.125);
        assert_relative_eq!(s.rho[4], 0.875);

        let bad = InitialDataSpec::table(vec![[0.0, 0.5, 0.0], [1.0, 1.0, 0.0]]);
        assert!(matches!(init_state(&bad, &cfg, &grid), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::new(1.4, Delta::Euler).validate().is_ok());
        let err = ModelConfig::new(0.9, Delta::Euler).validate().unwrap_err();
        assert!(err.to_string().contains("gamma must exceed 1"));
        assert!(ModelConfig::new(1.8, Delta::Gravity).validate().is_err());
        assert!(ModelConfig::new(1.4, Delta::Gravity).with_dim(2).validate().is_err());
        assert!(ModelConfig::new(1.4, Delta::Euler).with_dim(2).validate().is_ok());
        assert!(Delta::try_from(2).is_err());
    }
}
