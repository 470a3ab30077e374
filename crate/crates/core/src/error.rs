//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by geometry, group, SDE and controller routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    /// A point does not lie on the model surface (norm constraint violated).
    #[error("point is off the model surface: residual {residual:.3e}")]
    OffSurface { residual: f64 },

    /// The inter-point distance leaves the range where the frame is defined.
    #[error("distance {r:.6e} outside the frame domain (0, {limit:.6e})")]
    OutOfDomain { r: f64, limit: f64 },

    /// The control matrices do not satisfy K Kᵀ + K̂ K̂ᵀ = I.
    #[error("invalid control pair: |K Kᵀ + K̂ K̂ᵀ - I| = {residual:.3e}")]
    InvalidControl { residual: f64 },

    /// A strategy is not defined for the requested curvature.
    #[error("strategy {strategy} is not defined for curvature k = {k}")]
    UnsupportedCurvature { strategy: &'static str, k: f64 },

    /// A user supplied parameter violates its documented constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical routine produced a non-finite value.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// A single Monte Carlo trial failed.
    #[error("trial {index}: {source}")]
    Trial {
        index: u64,
        source: Box<CouplingError>,
    },

    /// Writing an output artifact failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CouplingError {
    fn from(e: std::io::Error) -> Self {
        CouplingError::Io(e.to_string())
    }
}

impl From<csv::Error> for CouplingError {
    fn from(e: csv::Error) -> Self {
        CouplingError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CouplingError {
    fn from(e: serde_json::Error) -> Self {
        CouplingError::Io(e.to_string())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CouplingError>;
