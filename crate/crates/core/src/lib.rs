//! Numerical laboratory for finite-time singularity formation in spherically
//! symmetric compressible Euler and Euler–Poisson flows.
//!
//! The crate couples a radial finite-volume solver ([`dynamics`]) with the
//! weighted averaged functionals `F`, `Q`, `R`, `M`, `E_δ` ([`functionals`]),
//! the Riccati-type lifespan monitors built on them ([`theorems`]), standalone
//! inequality verifiers ([`inequalities`]) and an ε-sweep harness ([`sweep`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod inequalities;
pub mod model;
pub mod sweep;
pub mod theorems;

pub use error::{Error, Result};
pub use model::{Delta, Family, FluidState, InitialDataSpec, ModelConfig, RadialGrid};
