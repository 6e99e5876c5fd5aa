use thiserror::Error;

use crate::subalgebra::AlgebraKind;

/// Errors produced by the matrix, subalgebra, entropy and four-level routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("negative eigenvalue {value:e} below tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("span closure did not stabilize after {rounds} rounds")]
    ClosureDidNotStabilize { rounds: usize },

    #[error("operation not supported for {0:?} subalgebras")]
    UnsupportedKind(AlgebraKind),

    #[error("joint diagonalization failed: {0}")]
    JointDiagonalization(String),

    #[error("subalgebra is not homogeneous: minimal projection traces {traces:?}")]
    NotHomogeneous { traces: Vec<f64> },

    #[error("invalid convex decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symplectic form u∘v vanishes mod {p}; the embedding is undefined")]
    DegenerateSymplectic { p: u64 },

    #[error("operand {index} is not a P-unitary (residual {residual:e})")]
    NotPUnitary { index: usize, residual: f64 },

    #[error("triplet satisfies neither S3 = ±i S1 S2 nor S3 = ±S1 S2 (best residual {residual:e})")]
    TripletRelation { residual: f64 },

    #[error("triplet is not orthogonal to the factor and its commutant (residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("operator Schmidt rank exceeds one (second singular value {second:e})")]
    SchmidtRank { second: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
