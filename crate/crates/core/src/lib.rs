//! Explicit (phi, Gamma)-module computations over a truncated model of the
//! bivariate period ring.

pub mod bounds;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod gamma_action;
pub mod hasse;
pub mod homology;
pub mod phi_psi;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
