use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// C_(I) > 1: the existence threshold is not met and C_(II) is undefined.
    #[error("C_(I) = {c1} exceeds one, the existence condition does not apply")]
    C1ExceedsOne { c1: f64 },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("fixed-point iteration stalled after {iterations} iterations (residual {residual:.3e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("fixed-point iteration diverged at iteration {iterations} (|xi|_X = {norm:.3e})")]
    Diverged { iterations: usize, norm: f64 },

    #[error("ascent did not stabilize: {0}")]
    NoConvergence(String),

    #[error("solve failed at refinement level {level}: {source}")]
    SolveFailed {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("expression error: {0}")]
    Expr(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code of the failure class: configuration 2, solve 3,
    /// certificate 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::Mesh(_) | Error::Expr(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::LinearSolveFailure(_)
            | Error::MaxIterExceeded { .. }
            | Error::Diverged { .. }
            | Error::NoConvergence(_)
            | Error::SolveFailed { .. } => 3,
            Error::C1ExceedsOne { .. } => 4,
        }
    }
}
