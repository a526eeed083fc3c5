//! TOML experiment configuration.

use std::path::Path;

use blowup_core::model::{make_grid, DEFAULT_DENSITY_FLOOR, DEFAULT_R_MAX};
use blowup_core::{Delta, Family, InitialDataSpec, ModelConfig, RadialGrid};
use serde::Deserialize;

use crate::exit::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub gamma: f64,
    pub delta: i32,
    #[serde(default = "default_dim")]
    pub dim_n: u32,
    pub family: Family,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    #[serde(default = "default_cells")]
    pub n_cells: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_factor")]
    pub blowup_gradient_factor: f64,
    #[serde(default)]
    pub seed: u64,
    /// Refuse to run when the theorem hypotheses fail.
    #[serde(default = "default_true")]
    pub verify_theorem: bool,
    /// `(r, ρ, v)` samples for `family = "table"`.
    pub table: Option<Vec<[f64; 3]>>,
}

fn default_dim() -> u32 {
    3
}
fn default_cells() -> usize {
    1024
}
fn default_r_max() -> f64 {
    DEFAULT_R_MAX
}
fn default_cfl() -> f64 {
    0.4
}
fn default_t_max() -> f64 {
    50.0
}
fn default_factor() -> f64 {
    10.0
}
fn default_true() -> bool {
    true
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        cfg.model()?;
        cfg.grid()?;
        if let Some(s) = cfg.sigma {
            if !(s > 0.0 && s < 0.5) {
                return Err(CliError::config(format!("sigma must lie in (0, 1/2) (got {s})")));
            }
        }
        if cfg.family == Family::Table && cfg.table.is_none() {
            return Err(CliError::config("family = \"table\" requires the key table"));
        }
        if cfg.family != Family::Table && cfg.table.is_some() {
            return Err(CliError::config("key table is only valid with family = \"table\""));
        }
        Ok(cfg)
    }

    pub fn model(&self) -> Result<ModelConfig, CliError> {
        let delta = Delta::try_from(self.delta).map_err(CliError::config)?;
        let cfg = ModelConfig {
            gamma: self.gamma,
            delta,
            dim_n: self.dim_n,
            cfl: self.cfl,
            density_floor: DEFAULT_DENSITY_FLOOR,
            blowup_gradient_factor: self.blowup_gradient_factor,
            t_max: self.t_max,
        };
        cfg.validate().map_err(CliError::config)?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<RadialGrid, CliError> {
        make_grid(self.r_max, self.n_cells).map_err(CliError::config)
    }

    /// Initial data for a single run; requires `eps` (or `table`).
    pub fn initial_data(&self) -> Result<InitialDataSpec, CliError> {
        let spec = match (&self.table, self.eps) {
            (Some(table), _) => InitialDataSpec::table(table.clone()),
            (None, Some(eps)) => InitialDataSpec::new(self.family, eps),
            (None, None) => return Err(CliError::config("missing key eps")),
        };
        spec.validate().map_err(CliError::from)?;
        Ok(spec)
    }

    pub fn eps_list(&self) -> Result<Vec<f64>, CliError> {
        match &self.eps_list {
            Some(list) if !list.is_empty() => {
                if let Some(bad) = list.iter().find(|e| !e.is_finite() || **e <= 0.0) {
                    return Err(CliError::config(format!("eps_list values must be positive (got {bad})")));
                }
                Ok(list.clone())
            }
            Some(_) => Err(CliError::config("eps_list must not be empty")),
            None => Err(CliError::config("missing key eps_list")),
        }
    }

    pub fn sigma_for_run(&self, delta: Delta) -> Option<f64> {
        match delta {
            Delta::Electrostatic => Some(self.sigma.unwrap_or(0.25)),
            _ => self.sigma,
        }
    }
}
