//! Heat kernels, log-Sobolev potentials and defective log-Sobolev constants on
//! H-type groups.
//!
//! The crate is organised bottom-up: scalar special functions and a vector
//! quadrature engine feed the heat-kernel evaluator, which in turn feeds the
//! potential `W_{t,C}`, its minimisation and the constant certificates. The
//! anisotropic Heisenberg machinery and a Brownian-motion sampler provide
//! independent cross-checks.

pub mod anisotropic;
pub mod certificates;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod heatkernel;
pub mod optimize;
pub mod potential;
pub mod quadrature;
pub mod sampler;
pub mod specialfn;

pub use error::{Error, Result};
