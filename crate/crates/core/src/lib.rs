//! Numerical tools for β-ensembles of random matrices with polynomial
//! potentials.

pub mod contour;
pub mod correction;
pub mod equilibrium;
pub mod error;
pub mod orthopoly;
pub mod potential;
pub mod quadrature;
pub mod sampler;
pub mod universality;

pub use error::{Error, Result};
pub use potential::Polynomial;
