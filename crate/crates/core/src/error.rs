use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPd { min_eig: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-formed LMI problem: {0}")]
    IllFormed(String),

    #[error("LMI oracle did not converge: {0}")]
    OracleFailure(String),

    #[error("LMI problem is infeasible: {0}")]
    Infeasible(String),

    #[error("objective is unbounded below: {0}")]
    Unbounded(String),

    #[error("completion certificate is invalid: {0}")]
    CertificateInvalid(String),

    #[error("no completion produced a valid ellipsoid and the center guess is infeasible")]
    EmptyUnion,

    #[error("operation is not supported on a degenerate set")]
    UnsupportedSet,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape_err(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
