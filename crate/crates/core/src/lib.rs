//! Polyharmonic capacities, small-hole eigenvalue perturbations and their
//! asymptotics, on Cartesian grids (N ≤ 4) and radial models (any N).

pub mod asymptotics;
pub mod bessel;
pub mod capacity;
pub mod cli;
pub mod error;
pub mod grid;
pub mod operator;
pub mod poly;
pub mod quadrature;
pub mod radial;
pub mod sparse;
pub mod spectrum;

pub use error::{Error, Result};
