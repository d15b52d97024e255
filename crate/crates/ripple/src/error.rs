//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RippleError {
    /// Invalid grid dimensions or study configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant (Hermitian symmetry, mask symmetry, mean-zero
    /// precondition) was violated.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Two fields on different grids were combined.
    #[error("grid mismatch: {0}x{1} vs {2}x{3}")]
    GridMismatch(usize, usize, usize, usize),

    /// Picard iteration stopped contracting; carries the residual history.
    #[error("fixed-point iteration diverged after {iterations} iterations (sigma above threshold?)")]
    NonContraction {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RippleError>;
