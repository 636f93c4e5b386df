//! Error taxonomy shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coefficient model: {0}")]
    InvalidCoefficient(String),

    #[error("numerical integration failed: {0}")]
    QuadratureFailure(String),

    #[error("(alpha, beta) = ({alpha}, {beta}) is outside the effective-damping region: {detail}")]
    OutOfRegion {
        alpha: f64,
        beta: f64,
        detail: String,
    },

    #[error("invalid nonlinearity model: {0}")]
    InvalidModel(String),

    #[error("numerical overflow in {0}")]
    Overflow(String),

    #[error("zero-mean violation: {0}")]
    ZeroMeanViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("step size underflow (dt = {dt:.3e} at t = {t:.6e}); problem too stiff for the configured tolerance")]
    StiffnessFailure { t: f64, dt: f64 },

    #[error("blow-up detected at t = {t:.6e} (sup-norm {sup:.3e})")]
    BlowUpDetected { t: f64, sup: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("log-domain error: {0}")]
    LogDomain(String),

    #[error("input validation: {0}")]
    InvalidInput(String),

    #[error("undefined profile: {0}")]
    UndefinedProfile(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
