use std::path::PathBuf;
use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum PceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis size C({order}+{dim}, {dim}) overflows usize")]
    BasisOverflow { dim: usize, order: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column {0} of the measurement matrix is zero")]
    ZeroColumn(usize),

    #[error("non-finite value at quadrature node {node}")]
    NonFinite { node: usize },

    #[error("reference norm is numerically zero")]
    ZeroReference,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e}, target {target:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        target: f64,
        /// Best iterate found, stored in double precision.
        best: Vec<f64>,
    },

    #[error("cross-validation failed for every candidate: {0:?}")]
    CrossValidation(Vec<String>),

    #[error("eigensolver did not converge in {sweeps} sweeps")]
    Eigensolver { sweeps: usize },

    #[error("root bracketing failed for KL eigenvalue {index}")]
    RootBracket { index: usize },

    #[error("non-positive diffusion coefficient {value:e} at x = {x}")]
    NonPositiveCoefficient { x: f64, value: f64 },

    #[error("rotation iteration {iteration} failed: {source}")]
    Rotation {
        iteration: usize,
        #[source]
        source: Box<PceError>,
        /// Number of completed iterations before the failure.
        completed: usize,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, PceError>;
