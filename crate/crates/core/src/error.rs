use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("topology error on edge {edge}: {message}")]
    Topology { edge: usize, message: String },

    #[error("invalid element {element}: {message}")]
    InvalidElement { element: usize, message: String },

    #[error("degenerate cell {element}: area {area:e}")]
    DegenerateCell { element: usize, area: f64 },

    #[error("edge {edge} does not belong to element {element}")]
    EdgeNotInElement { element: usize, edge: usize },

    #[error("mass matrix is singular ({context})")]
    SingularMass { context: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sparse Cholesky factorization failed: {0}")]
    Factorization(String),

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("relative residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
