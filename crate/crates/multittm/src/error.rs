use thiserror::Error;

/// Errors produced by shape validation, solvers, grid construction, and the
/// simulator.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("infeasible divisor: {0}")]
    InfeasibleDivisor(String),

    #[error("load balance violation: {0}")]
    LoadBalance(String),

    #[error("KKT certificate invalid ({condition}): {detail}")]
    CertificateInvalid { condition: String, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("divisibility violation: {0}")]
    Divisibility(String),

    #[error("not a power of two: {0}")]
    NotPowerOfTwo(String),

    #[error("invalid mode order: {0}")]
    InvalidModeOrder(String),

    #[error("no feasible grid factorization: {0}")]
    NoFeasibleGrid(String),

    #[error("unknown figure id: {0}")]
    UnknownFigure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
