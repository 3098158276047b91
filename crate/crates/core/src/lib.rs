//! Equilibria, radial pulsations, linear evolution and exterior matching for
//! barotropic stars in general relativity with a positive cosmological
//! constant.
//!
//! The pipeline runs `model` (equation of state) -> `equilibrium` (TOV
//! integration with Lambda) -> `linearop` (pulsation operator and the
//! regularizing x-chart) -> `modes` (spectrum) -> `evolve` (linearized
//! dynamics) -> `exterior` (Schwarzschild-de Sitter matching).

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numeric;
pub mod model;
pub mod equilibrium;
pub mod linearop;
pub mod modes;
pub mod evolve;
pub mod exterior;
pub mod cli;

pub use error::{Error, Result};
