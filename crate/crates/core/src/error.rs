use alloc::string::String;

use crate::mathieu::BasisIndex;
use crate::scattering::BoundaryCondition;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("characteristic value for {index} at q = {q} did not converge")]
    EigenNoConvergence { index: BasisIndex, q: f64 },

    #[error("series for {what} did not converge")]
    SeriesNoConvergence { what: String },

    #[error("out of certified range: {0}")]
    Range(String),

    #[error("log-determinant failed at p = {p} ({bc}): {reason}")]
    Determinant {
        p: f64,
        bc: BoundaryCondition,
        reason: String,
    },

    #[error("integration did not reach tolerance: {0}")]
    Integration(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
