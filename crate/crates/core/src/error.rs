//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or vector had the wrong dimension for the requested operation.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Input matrix deviates from (conjugate) symmetry beyond tolerance.
    #[error("matrix is not Hermitian (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    /// Operator fails the projector test P^2 = P.
    #[error("operator is not a projector (idempotency residual {residual:.3e})")]
    NotProjector { residual: f64 },

    /// Domain-object validation failed (stochasticity, normalization, ranges).
    #[error("validation failed: {0}")]
    Validation(String),

    /// Channel/correlation/strategy alphabets do not line up.
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    /// An enumeration or iteration budget was exceeded.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// An iterative solver failed to converge within its guard limits.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Supplied dual multipliers violate their feasibility constraints.
    #[error("infeasible certificate: {0}")]
    InfeasibleCertificate(String),

    /// A reported value failed its own certificate re-check.
    #[error("certificate mismatch: {0}")]
    CertificateMismatch(String),

    /// Structured-file parse error with location context where available.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
