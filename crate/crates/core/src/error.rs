use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    Quadrature {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("degenerate block: |P_k(x)| = 0, the stationary point is undefined")]
    DegenerateBlock,

    #[error("mass deficit {deficit:e} exceeds tolerance {tolerance:e}; enlarge the quadrature box")]
    MassDeficit { deficit: f64, tolerance: f64 },

    #[error("imaginary residual {residual:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidual { residual: f64, tolerance: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
