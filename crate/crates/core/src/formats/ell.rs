use super::pad_marker;
use crate::matrix::{row_nnz_histogram, CooMatrix};

/// ELLPACK: an `n_rows x k` grid, row-major, with `k` the longest row.
///
/// Rows are left-justified; padded slots hold value 0.0 and repeat the row's
/// last valid column index so a padded gather stays in bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EllMatrix {
    n_rows: usize,
    n_cols: usize,
    k: usize,
    row_len: Vec<u32>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl EllMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Grid width.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nnz(&self) -> usize {
        self.row_len.iter().map(|&l| l as usize).sum()
    }

    /// Number of valid (non-padding) slots in each row.
    pub fn row_len(&self) -> &[u32] {
        &self.row_len
    }

    /// Row-major `n_rows * k` column grid, padding included.
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Row-major `n_rows * k` value grid, padding included.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// All `k` slots of row `i`, padding included.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let span = i * self.k..(i + 1) * self.k;
        (&self.indices[span.clone()], &self.data[span])
    }

    pub fn to_coo(&self) -> CooMatrix {
        let nnz = self.nnz();
        let mut row = Vec::with_capacity(nnz);
        let mut col = Vec::with_capacity(nnz);
        let mut data = Vec::with_capacity(nnz);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let len = self.row_len[i] as usize;
            row.extend(std::iter::repeat_n(i as u32, len));
            col.extend_from_slice(&cols[..len]);
            data.extend_from_slice(&vals[..len]);
        }
        CooMatrix::from_canonical_parts(self.n_rows, self.n_cols, row, col, data)
    }

    /// Builds an ELL grid of the given width holding at most `k` leading
    /// entries per row. Returns the matrix and the canonical-order positions
    /// of the entries that did not fit.
    pub(crate) fn with_width(a: &CooMatrix, k: usize) -> (EllMatrix, Vec<usize>) {
        let n_rows = a.n_rows();
        let mut row_len = vec![0u32; n_rows];
        let mut indices = vec![0u32; n_rows * k];
        let mut data = vec![0.0; n_rows * k];
        let mut overflow = Vec::new();
        for (pos, (r, c, v)) in a.iter().enumerate() {
            let slot = row_len[r] as usize;
            if slot < k {
                indices[r * k + slot] = c as u32;
                data[r * k + slot] = v;
                row_len[r] += 1;
            } else {
                overflow.push(pos);
            }
        }
        for i in 0..n_rows {
            let len = row_len[i] as usize;
            let marker = pad_marker(&indices[i * k..i * k + len]);
            indices[i * k + len..(i + 1) * k].fill(marker);
        }
        (
            EllMatrix {
                n_rows,
                n_cols: a.n_cols(),
                k,
                row_len,
                indices,
                data,
            },
            overflow,
        )
    }
}

pub fn to_ell(a: &CooMatrix) -> EllMatrix {
    let k = row_nnz_histogram(a).into_iter().max().unwrap_or(0);
    EllMatrix::with_width(a, k).0
}
