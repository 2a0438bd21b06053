//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum XyError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("site index {site} out of range for {sites}-site space")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("duplicate target site {0}")]
    DuplicateSite(usize),

    #[error("matrix is not unitary (defect {defect:.3e} exceeds {tol:.3e})")]
    NonUnitary { defect: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("interleaved unit is not a Clifford operation")]
    NotClifford,

    #[error("circuit cannot be routed: {0}")]
    Unroutable(String),
}
