use thiserror::Error;

/// Errors produced by graph construction, spectral operations and training.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({i}, {j}) is a self-loop")]
    SelfLoop { i: usize, j: usize },

    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("edge ({i}, {j}) has nonpositive or non-finite weight {weight}")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("edge ({i}, {j}) appears more than once")]
    DuplicateEdge { i: usize, j: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {deviation:e}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },

    #[error("matrix has eigenvalue {value:e}, which is not round-off of a PSD spectrum")]
    NotPositiveSemidefinite { value: f64 },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NotConverged { sweeps: usize, off_norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
