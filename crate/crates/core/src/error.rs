use thiserror::Error;

/// Errors reported by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("function is not quadratic: {probe} deviates by {mismatch:.3e} (relative)")]
    NotQuadratic { probe: String, mismatch: f64 },

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected d={expected}, found d={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate compatible grid: every direction has |a⊙b| <= 1e-8")]
    DegenerateGrid,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
