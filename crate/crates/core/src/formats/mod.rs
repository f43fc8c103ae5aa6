//! Sparse storage formats built from canonical COO.
//!
//! Every format converts back to the exact COO it was built from via
//! [`FormatMatrix::to_coo`].

mod csr;
mod csr5;
mod ell;
mod hyb;
mod sell;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use csr::{to_csr, CsrMatrix};
pub use csr5::{to_csr5, Csr5Matrix};
pub use ell::{to_ell, EllMatrix};
pub use hyb::{hyb_typical_k, to_hyb, HybMatrix};
pub use sell::{to_sell, SellMatrix};

use crate::matrix::CooMatrix;

/// The benchmarked storage formats, in declaration order.
///
/// Declaration order is significant: it breaks ties in best-format labels
/// and in decision-tree leaf majorities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormatTag {
    Csr,
    Csr5,
    Ell,
    Sell,
    Hyb,
}

impl FormatTag {
    pub const ALL: [FormatTag; 5] = [
        FormatTag::Csr,
        FormatTag::Csr5,
        FormatTag::Ell,
        FormatTag::Sell,
        FormatTag::Hyb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormatTag::Csr => "csr",
            FormatTag::Csr5 => "csr5",
            FormatTag::Ell => "ell",
            FormatTag::Sell => "sell",
            FormatTag::Hyb => "hyb",
        }
    }

    /// Position in [`FormatTag::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<FormatTag> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for FormatTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown format `{0}` (expected one of csr, csr5, ell, sell, hyb)")]
pub struct UnknownFormat(pub String);

impl FromStr for FormatTag {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FormatTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownFormat(s.to_string()))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("CSR5 tile parameters must be positive (omega={omega}, sigma={sigma})")]
    InvalidTile { omega: usize, sigma: usize },
    #[error("SELL slice height must be positive")]
    InvalidSliceHeight,
    #[error("SELL sorting window {sigma} is not a positive multiple of the slice height {c}")]
    InvalidSortWindow { c: usize, sigma: usize },
}

/// Tuning parameters for the parameterized formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatParams {
    pub csr5_omega: usize,
    pub csr5_sigma: usize,
    pub sell_c: usize,
    /// 0 selects plain SELL; otherwise rows are sorted within windows of this many rows.
    pub sell_sigma: usize,
}

impl Default for FormatParams {
    fn default() -> Self {
        FormatParams {
            csr5_omega: 4,
            csr5_sigma: 16,
            sell_c: 8,
            sell_sigma: 0,
        }
    }
}

/// A matrix in one of the benchmarked formats.
#[derive(Debug, Clone, PartialEq)]
pub enum FormatMatrix {
    Csr(CsrMatrix),
    Csr5(Csr5Matrix),
    Ell(EllMatrix),
    Sell(SellMatrix),
    Hyb(HybMatrix),
}

impl FormatMatrix {
    pub fn tag(&self) -> FormatTag {
        match self {
            FormatMatrix::Csr(_) => FormatTag::Csr,
            FormatMatrix::Csr5(_) => FormatTag::Csr5,
            FormatMatrix::Ell(_) => FormatTag::Ell,
            FormatMatrix::Sell(_) => FormatTag::Sell,
            FormatMatrix::Hyb(_) => FormatTag::Hyb,
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            FormatMatrix::Csr(m) => m.n_rows(),
            FormatMatrix::Csr5(m) => m.n_rows(),
            FormatMatrix::Ell(m) => m.n_rows(),
            FormatMatrix::Sell(m) => m.n_rows(),
            FormatMatrix::Hyb(m) => m.n_rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            FormatMatrix::Csr(m) => m.n_cols(),
            FormatMatrix::Csr5(m) => m.n_cols(),
            FormatMatrix::Ell(m) => m.n_cols(),
            FormatMatrix::Sell(m) => m.n_cols(),
            FormatMatrix::Hyb(m) => m.n_cols(),
        }
    }

    /// Structural nonzeros (padding excluded).
    pub fn nnz(&self) -> usize {
        match self {
            FormatMatrix::Csr(m) => m.nnz(),
            FormatMatrix::Csr5(m) => m.nnz(),
            FormatMatrix::Ell(m) => m.nnz(),
            FormatMatrix::Sell(m) => m.nnz(),
            FormatMatrix::Hyb(m) => m.nnz(),
        }
    }

    pub fn to_coo(&self) -> CooMatrix {
        match self {
            FormatMatrix::Csr(m) => m.to_coo(),
            FormatMatrix::Csr5(m) => m.to_coo(),
            FormatMatrix::Ell(m) => m.to_coo(),
            FormatMatrix::Sell(m) => m.to_coo(),
            FormatMatrix::Hyb(m) => m.to_coo(),
        }
    }
}

/// Converts `a` into the format named by `tag`.
pub fn convert(a: &CooMatrix, tag: FormatTag, params: &FormatParams) -> Result<FormatMatrix, FormatError> {
    Ok(match tag {
        FormatTag::Csr => FormatMatrix::Csr(to_csr(a)),
        FormatTag::Csr5 => FormatMatrix::Csr5(to_csr5(a, params.csr5_omega, params.csr5_sigma)?),
        FormatTag::Ell => FormatMatrix::Ell(to_ell(a)),
        FormatTag::Sell => FormatMatrix::Sell(to_sell(a, params.sell_c, params.sell_sigma)?),
        FormatTag::Hyb => FormatMatrix::Hyb(to_hyb(a)),
    })
}

/// Row pointer array of a canonical COO matrix.
pub(crate) fn row_ptr(a: &CooMatrix) -> Vec<usize> {
    let mut ptr = vec![0usize; a.n_rows() + 1];
    for &r in a.rows() {
        ptr[r as usize + 1] += 1;
    }
    for i in 0..a.n_rows() {
        ptr[i + 1] += ptr[i];
    }
    ptr
}

/// Column index stored in padded slots: the row's last valid column, or 0 for
/// an empty row. Padded values are always 0.0.
pub(crate) fn pad_marker(cols: &[u32]) -> u32 {
    cols.last().copied().unwrap_or(0)
}
