use thiserror::Error;

/// Failures raised by the verification kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("radial formula evaluated at the origin")]
    OriginSingularity,

    #[error("boundary mass fraction {mass:.3e} exceeds aliasing threshold {threshold:.3e}")]
    BoundaryMass { mass: f64, threshold: f64 },

    #[error("quadrature tolerance not met: estimate {estimate:.17e}, error {error:.3e} after {panels} panels")]
    ToleranceNotMet { estimate: f64, error: f64, panels: usize },

    #[error("weight `{label}` violates a hypothesis: {reason}")]
    InvalidWeight { label: String, reason: String },

    #[error("sequence does not converge: {0}")]
    NonConvergent(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LabError {
    LabError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
