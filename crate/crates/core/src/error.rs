use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A Gram matrix lost full rank (smallest eigenvalue at or below the
    /// numeric floor `1e-12 * largest`).
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No (strictly) feasible point exists for the requested constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The IRL1 outer loop hit its safety cap without producing a binary table.
    #[error("outer iteration limit exceeded: {0}")]
    MaxOuterIterExceeded(String),

    /// Input exceeds a combinatorial guard (e.g. exhaustive search size).
    #[error("too large: {0}")]
    TooLarge(String),

    /// Structurally invalid input: shape mismatch, negative cost, bad file.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numeric routine failed (factorization breakdown, non-finite value).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// File input/output failure.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(format!("json: {e}"))
    }
}
