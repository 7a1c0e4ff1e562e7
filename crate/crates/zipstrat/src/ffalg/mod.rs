//! Exact linear algebra over GF(p^m): deterministic field construction,
//! dense matrices, canonical (RREF) subspaces, and Frobenius-semilinear maps.

mod field;
mod matrix;
mod semilinear;
mod subspace;

pub use field::{make_field, Field, FieldCtx, FieldError};
pub use matrix::{Matrix, MatrixRepr};
pub use semilinear::{SemilinearMap, SemilinearRepr};
pub use subspace::Subspace;

/// Errors shared by the linear-algebra operations.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("fields differ between operands")]
    FieldMismatch,
}
