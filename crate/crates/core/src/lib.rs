//! Randomized L2 approximation from function values.
//!
//! This crate builds weighted least squares approximants on random nodes drawn
//! from a Christoffel-type mixture density, and ships the experiment machinery
//! used to verify the estimator's error bounds, the spectral concentration of
//! the empirical Gram matrix, and the induced information-complexity transfer
//! inequalities at desk scale.

pub mod basis;
pub mod coeff;
pub mod complexity;
pub mod error;
pub mod error_lab;
pub mod instance;
pub mod quadrature;
pub mod sampler;
pub mod spectral;
pub mod stream;
pub mod tract;
pub mod weights;
pub mod wls;

pub use error::{Error, Result};
