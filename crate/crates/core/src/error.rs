use thiserror::Error;

/// Errors produced by the estimation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transmissivity {0} lies outside [0, 1]")]
    InvalidTransmissivity(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("mean photon number {nbar} is infeasible for cutoff {cutoff}")]
    Infeasible { nbar: f64, cutoff: usize },

    /// Gamma_1 carries weight outside the support of Gamma_0.
    #[error("ill-posed Personick system: |Gamma1| = {magnitude:e} on a null pair of Gamma0")]
    IllPosed { magnitude: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
