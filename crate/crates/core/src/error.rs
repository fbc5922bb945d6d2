use thiserror::Error;

/// Errors produced by the scattering toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("kernel singularity: source and target coincide")]
    Singularity,

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular linear system (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("linear solve did not reach tolerance: relative residual {residual:.3e}")]
    SolveTolerance { residual: f64 },

    #[error("empty field: {0}")]
    EmptyField(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
