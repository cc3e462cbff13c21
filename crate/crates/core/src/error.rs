use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("weight tail {achieved:.3e} still above target {target:.3e} after {k_max} terms")]
    Truncation {
        k_max: usize,
        achieved: f64,
        target: f64,
    },

    #[error("index {index} outside window [{min}, {max}]")]
    Index { index: i64, min: i64, max: i64 },

    #[error("CFL violation at step {step}: {detail}")]
    CflViolation { step: usize, detail: String },

    #[error("non-finite value at step {step}, node {index}")]
    NonFinite { step: usize, index: i64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("quadrature did not reach tolerance (estimated error {0:.3e})")]
    Quadrature(f64),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
