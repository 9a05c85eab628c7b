//! Orthogonal polynomials on the unit circle.
//!
//! The crate computes OPUC for analytic weights and for weights with zeros on
//! the circle, represents them through the scattering function `S = D_i D_e`
//! via a Neumann series, and evaluates closed-form asymptotic predictors that
//! can be checked against a moment/recurrence oracle.

pub mod error;
pub mod laurent;
pub mod weights;
pub mod szego;
pub mod oracle;
pub mod canonical;
pub mod zeros;
pub mod asymptotics;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
