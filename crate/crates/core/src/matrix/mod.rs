//! Canonical coordinate storage, Matrix Market I/O and the dense reference SpMV.

mod coo;
mod mtx;

pub use coo::{canonicalize, dense_spmv_oracle, example_matrix, row_nnz_histogram, CooMatrix};
pub use mtx::{read_matrix_market, read_matrix_market_file, write_matrix_market, MtxError};

use thiserror::Error;

/// Largest row/column count or nonzero count a matrix may have; indices are stored as `u32`.
pub const MAX_INDEX: usize = u32::MAX as usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("entry ({row}, {col}) lies outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("{what} = {value} exceeds the 32-bit index limit")]
    TooLarge { what: &'static str, value: usize },
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
