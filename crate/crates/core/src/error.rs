//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh spec: {0}")]
    InvalidSpec(String),

    #[error("field does not belong to this mesh")]
    MeshMismatch,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("lambda = {0} is outside the admissible range (-inf, 8*pi)")]
    LambdaOutOfRange(f64),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("continuation step underflow; last good lambda = {last_lambda}")]
    StepUnderflow { last_lambda: f64 },

    #[error("linear system is singular or severely ill-conditioned: {0}")]
    SingularSystem(String),

    #[error("eigenvalue iteration did not converge after {0} iterations")]
    EigenNonConvergence(usize),

    #[error("density must be strictly positive everywhere")]
    DegenerateDensity,

    #[error("branch does not bracket a sign change of g")]
    NoSignChange,

    #[error("branch energy is not strictly increasing at index {0}")]
    NonMonotoneEnergy(usize),

    #[error("internal anomaly: {0}")]
    Anomaly(String),
}

pub type Result<T> = std::result::Result<T, Error>;
