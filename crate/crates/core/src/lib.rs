//! Sparse matrix storage formats, SpMV kernels, a benchmarking harness and a
//! decision-tree model that picks the fastest format for a matrix.
//!
//! The pipeline is: read a Matrix Market file into canonical COO
//! ([`matrix`]), convert it to CSR, CSR5, ELL, SELL or HYB ([`formats`]),
//! run SpMV ([`kernels`]), time every format ([`bench`]), extract static
//! features ([`features`]) and train or apply a format selector ([`model`]).

pub mod bench;
pub mod features;
pub mod formats;
pub mod kernels;
pub mod matrix;
pub mod model;
pub mod report;
pub mod synth;
mod textrec;

pub use formats::{convert, FormatMatrix, FormatParams, FormatTag};
pub use matrix::CooMatrix;
