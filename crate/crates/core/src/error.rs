use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("energy {energy} lies within {tolerance:e} of base eigenenergy E_{index}")]
    BasePole {
        index: usize,
        energy: f64,
        tolerance: f64,
    },

    #[error("vanishing denominator at E = {energy}: |D| = {magnitude:e}")]
    VanishingDenominator { energy: f64, magnitude: f64 },

    #[error("band parameter a = P_R L / 2 = {band_a} is within {tolerance:e} of a multiple of pi")]
    DegenerateBand { band_a: f64, tolerance: f64 },

    #[error("ill-conditioned resolvent: condition estimate {estimate:e}")]
    IllConditioned { estimate: f64 },

    #[error("numerical contract violated: {0}")]
    Numerical(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("underdetermined fit: {usable} usable modes, need at least {needed}")]
    Underdetermined { usable: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
