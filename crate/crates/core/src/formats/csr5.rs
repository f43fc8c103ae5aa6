//! CSR5: CSR nonzeros regrouped into fixed-size 2D tiles.
//!
//! The nonzeros are cut, in CSR order, into tiles of `omega * sigma` entries.
//! A tile is a `sigma x omega` grid filled column by column (column 0 top to
//! bottom, then column 1, ...) and stored row-major, so each of the `omega`
//! lanes owns one column. A trailing partial tile keeps plain CSR order; its
//! columns are still the consecutive runs of `sigma` entries.
//!
//! Per tile the descriptor holds:
//! - `bit_flag`: set on an entry that starts a row, and forced on the first
//!   entry of every tile;
//! - `y_off[j]`: number of set flags in columns `0..j`;
//! - `seg_off[j]`: how many columns to the right column `j`'s open segment
//!   spills into: the run of following columns whose first entry is not
//!   flagged, ending early at a column that starts a row further down.
//!
//! With no empty rows, the `f`-th flag of tile `t` belongs to row
//! `tile_ptr[t] + f`. Empty rows never receive a flag, so in general that is a
//! lower bound and the owning row is found by skipping empty rows via `ptr`.

use super::{row_ptr, FormatError};
use crate::matrix::CooMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Csr5Matrix {
    n_rows: usize,
    n_cols: usize,
    omega: usize,
    sigma: usize,
    ptr: Vec<usize>,
    tile_ptr: Vec<usize>,
    bit_flag: Vec<bool>,
    y_off: Vec<u32>,
    seg_off: Vec<u32>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl Csr5Matrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn tile_size(&self) -> usize {
        self.omega * self.sigma
    }

    pub fn num_tiles(&self) -> usize {
        self.tile_ptr.len() - 1
    }

    /// CSR row pointer, shared with the CSR layout.
    pub fn ptr(&self) -> &[usize] {
        &self.ptr
    }

    pub fn tile_ptr(&self) -> &[usize] {
        &self.tile_ptr
    }

    /// Flags in stored order, `nnz` entries.
    pub fn bit_flag(&self) -> &[bool] {
        &self.bit_flag
    }

    /// `omega` entries per tile.
    pub fn y_off(&self) -> &[u32] {
        &self.y_off
    }

    /// `omega` entries per tile.
    pub fn seg_off(&self) -> &[u32] {
        &self.seg_off
    }

    /// Column indices in stored (tiled) order.
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Values in stored (tiled) order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Range of stored positions (and CSR positions) covered by tile `t`.
    pub fn tile_range(&self, t: usize) -> std::ops::Range<usize> {
        let start = t * self.tile_size();
        start..(start + self.tile_size()).min(self.nnz())
    }

    /// Stored position of the entry at `(lane row i, column j)` of tile `t`,
    /// or `None` when that slot is beyond the tile's entries.
    pub fn stored_position(&self, t: usize, i: usize, j: usize) -> Option<usize> {
        let range = self.tile_range(t);
        let local = j * self.sigma + i;
        if i >= self.sigma || j >= self.omega || local >= range.len() {
            return None;
        }
        Some(stored_offset(range.start, range.len(), self.omega, self.sigma, local))
    }

    pub fn to_coo(&self) -> CooMatrix {
        let nnz = self.nnz();
        let mut col = vec![0u32; nnz];
        let mut data = vec![0.0; nnz];
        for t in 0..self.num_tiles() {
            let range = self.tile_range(t);
            for local in 0..range.len() {
                let s = stored_offset(range.start, range.len(), self.omega, self.sigma, local);
                col[range.start + local] = self.indices[s];
                data[range.start + local] = self.data[s];
            }
        }
        let mut row = Vec::with_capacity(nnz);
        for i in 0..self.n_rows {
            row.extend(std::iter::repeat_n(i as u32, self.ptr[i + 1] - self.ptr[i]));
        }
        CooMatrix::from_canonical_parts(self.n_rows, self.n_cols, row, col, data)
    }
}

/// Stored position of the `local`-th CSR-order entry of a tile starting at `base`.
#[inline]
fn stored_offset(base: usize, len: usize, omega: usize, sigma: usize, local: usize) -> usize {
    if len == omega * sigma {
        base + (local % sigma) * omega + local / sigma
    } else {
        base + local
    }
}

pub fn to_csr5(a: &CooMatrix, omega: usize, sigma: usize) -> Result<Csr5Matrix, FormatError> {
    if omega == 0 || sigma == 0 {
        return Err(FormatError::InvalidTile { omega, sigma });
    }
    let nnz = a.nnz();
    let tile = omega * sigma;
    let num_tiles = nnz.div_ceil(tile);
    let rows = a.rows();

    let mut tile_ptr = Vec::with_capacity(num_tiles + 1);
    let mut bit_flag = vec![false; nnz];
    let mut y_off = vec![0u32; num_tiles * omega];
    let mut seg_off = vec![0u32; num_tiles * omega];
    let mut indices = vec![0u32; nnz];
    let mut data = vec![0.0; nnz];

    for t in 0..num_tiles {
        let base = t * tile;
        let len = tile.min(nnz - base);
        tile_ptr.push(rows[base] as usize);

        let mut col_flags = vec![0u32; omega];
        let mut col_head_flagged = vec![false; omega];
        for local in 0..len {
            let g = base + local;
            let flag = local == 0 || rows[g] != rows[g - 1];
            let s = stored_offset(base, len, omega, sigma, local);
            bit_flag[s] = flag;
            indices[s] = a.cols()[g];
            data[s] = a.data()[g];
            let j = local / sigma;
            if flag {
                col_flags[j] += 1;
            }
            if local % sigma == 0 {
                col_head_flagged[j] = flag;
            }
        }

        let used_cols = len.div_ceil(sigma);
        let mut acc = 0u32;
        for j in 0..omega {
            y_off[t * omega + j] = acc;
            acc += col_flags[j];
            let mut spill = 0u32;
            for k in (j + 1)..used_cols {
                if col_head_flagged[k] {
                    break;
                }
                spill += 1;
                if col_flags[k] > 0 {
                    break;
                }
            }
            seg_off[t * omega + j] = spill;
        }
    }
    tile_ptr.push(a.n_rows());

    Ok(Csr5Matrix {
        n_rows: a.n_rows(),
        n_cols: a.n_cols(),
        omega,
        sigma,
        ptr: row_ptr(a),
        tile_ptr,
        bit_flag,
        y_off,
        seg_off,
        indices,
        data,
    })
}
