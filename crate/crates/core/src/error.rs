//! Library error type.

use thiserror::Error as ThisError;

/// Errors reported by mesh handling, assembly, and the solvers.
#[derive(Debug, ThisError)]
pub enum Error {
    /// Mesh file could not be read or written.
    #[error("mesh i/o: {0}")]
    MeshIo(#[from] std::io::Error),
    /// Mesh file contents are malformed.
    #[error("mesh format: {0}")]
    MeshFormat(String),
    /// Mesh connectivity is invalid (bad index, non-ascending cell, ...).
    #[error("mesh data: {0}")]
    MeshData(String),
    /// A configuration value is inconsistent (time step, order, problem id).
    #[error("config: {0}")]
    Config(String),
    /// Vector or matrix dimensions do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// The sparse factorization failed or the solve left a large residual.
    #[error("linear solver: {0}")]
    Solver(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
