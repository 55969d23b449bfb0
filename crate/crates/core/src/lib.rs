//! Wave dynamics in a one-dimensional box with a momentum-selective point
//! interaction: Green's functions, a tight-binding model, spectral time
//! evolution and entropy diagnostics.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod greens;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod roots;

pub use error::{Error, Result};
