//! Sliced ELLPACK and its row-sorted SELL-C-sigma variant.
//!
//! Rows are grouped into slices of `c` consecutive (permuted) rows; each slice
//! is an ELL block whose width is its longest row. Slice blocks are stored
//! back to back, column-major inside a slice so the `c` rows of one column
//! sit next to each other. With `sigma > 0` the rows of every window of
//! `sigma` consecutive rows are first ordered by descending length (stable).

use std::cmp::Reverse;

use super::{pad_marker, row_ptr, FormatError};
use crate::matrix::{row_nnz_histogram, CooMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SellMatrix {
    n_rows: usize,
    n_cols: usize,
    c: usize,
    sigma: usize,
    perm: Vec<u32>,
    slices: Vec<u32>,
    slice_ptr: Vec<usize>,
    row_len: Vec<u32>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl SellMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Slice height.
    pub fn c(&self) -> usize {
        self.c
    }

    /// Sorting window; 0 for plain SELL.
    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// `perm[p]` is the original row stored at permuted position `p`.
    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    /// Width of each slice.
    pub fn slices(&self) -> &[u32] {
        &self.slices
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    /// Offset of each slice block in `indices`/`data`, plus the total length.
    pub fn slice_ptr(&self) -> &[usize] {
        &self.slice_ptr
    }

    /// Valid entries of each row, in permuted order.
    pub fn row_len(&self) -> &[u32] {
        &self.row_len
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn nnz(&self) -> usize {
        self.row_len.iter().map(|&l| l as usize).sum()
    }

    /// Permuted rows covered by slice `s`.
    pub fn slice_rows(&self, s: usize) -> std::ops::Range<usize> {
        s * self.c..((s + 1) * self.c).min(self.n_rows)
    }

    /// Row `i` of slice `s` as `slices[s]` slots, padding included.
    pub fn slice_row(&self, s: usize, i: usize) -> (Vec<u32>, Vec<f64>) {
        let h = self.slice_rows(s).len();
        let width = self.slices[s] as usize;
        let base = self.slice_ptr[s];
        (0..width)
            .map(|j| (self.indices[base + j * h + i], self.data[base + j * h + i]))
            .unzip()
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for s in 0..self.num_slices() {
            let rows = self.slice_rows(s);
            let h = rows.len();
            let base = self.slice_ptr[s];
            for (i, p) in rows.enumerate() {
                let r = self.perm[p];
                for j in 0..self.row_len[p] as usize {
                    triplets.push((r, self.indices[base + j * h + i], self.data[base + j * h + i]));
                }
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let (mut row, mut col, mut data) = (
            Vec::with_capacity(triplets.len()),
            Vec::with_capacity(triplets.len()),
            Vec::with_capacity(triplets.len()),
        );
        for (r, c, v) in triplets {
            row.push(r);
            col.push(c);
            data.push(v);
        }
        CooMatrix::from_canonical_parts(self.n_rows, self.n_cols, row, col, data)
    }
}

/// Builds SELL (`sigma == 0`) or SELL-C-sigma (`sigma` a positive multiple of `c`).
pub fn to_sell(a: &CooMatrix, c: usize, sigma: usize) -> Result<SellMatrix, FormatError> {
    if c == 0 {
        return Err(FormatError::InvalidSliceHeight);
    }
    if sigma != 0 && !sigma.is_multiple_of(c) {
        return Err(FormatError::InvalidSortWindow { c, sigma });
    }
    let n_rows = a.n_rows();
    let nnz_per_row = row_nnz_histogram(a);
    let ptr = row_ptr(a);

    let mut perm: Vec<u32> = (0..n_rows as u32).collect();
    if sigma > 0 {
        for window in perm.chunks_mut(sigma) {
            window.sort_by_key(|&r| Reverse(nnz_per_row[r as usize]));
        }
    }
    let row_len: Vec<u32> = perm.iter().map(|&r| nnz_per_row[r as usize] as u32).collect();

    let num_slices = n_rows.div_ceil(c);
    let mut slices = Vec::with_capacity(num_slices);
    let mut slice_ptr = Vec::with_capacity(num_slices + 1);
    slice_ptr.push(0);
    for s in 0..num_slices {
        let rows = s * c..((s + 1) * c).min(n_rows);
        let width = row_len[rows.clone()].iter().copied().max().unwrap_or(0);
        slices.push(width);
        slice_ptr.push(slice_ptr[s] + rows.len() * width as usize);
    }

    let total = slice_ptr[num_slices];
    let mut indices = vec![0u32; total];
    let mut data = vec![0.0; total];
    for s in 0..num_slices {
        let rows = s * c..((s + 1) * c).min(n_rows);
        let h = rows.len();
        let base = slice_ptr[s];
        for (i, p) in rows.enumerate() {
            let r = perm[p] as usize;
            let cols = &a.cols()[ptr[r]..ptr[r + 1]];
            let vals = &a.data()[ptr[r]..ptr[r + 1]];
            for (j, (&col, &v)) in cols.iter().zip(vals).enumerate() {
                indices[base + j * h + i] = col;
                data[base + j * h + i] = v;
            }
            let marker = pad_marker(cols);
            for j in cols.len()..slices[s] as usize {
                indices[base + j * h + i] = marker;
            }
        }
    }

    Ok(SellMatrix {
        n_rows,
        n_cols: a.n_cols(),
        c,
        sigma,
        perm,
        slices,
        slice_ptr,
        row_len,
        indices,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::example_matrix;

    fn valid_prefix(m: &SellMatrix, s: usize, i: usize) -> (Vec<u32>, Vec<f64>) {
        let p = m.slice_rows(s).start + i;
        let len = m.row_len()[p] as usize;
        let (mut c, mut v) = m.slice_row(s, i);
        c.truncate(len);
        v.truncate(len);
        (c, v)
    }

    #[test]
    fn plain_sell_example() {
        let m = to_sell(&example_matrix(), 2, 0).unwrap();
        assert_eq!(m.slices(), &[3, 2]);
        assert_eq!(m.perm(), &[0, 1, 2, 3]);
        assert_eq!(valid_prefix(&m, 0, 0), (vec![1, 2], vec![6.0, 1.0]));
        assert_eq!(valid_prefix(&m, 0, 1), (vec![0, 2, 3], vec![2.0, 8.0, 3.0]));
        assert_eq!(valid_prefix(&m, 1, 0), (vec![2], vec![4.0]));
        assert_eq!(valid_prefix(&m, 1, 1), (vec![1, 2], vec![7.0, 5.0]));
        assert_eq!(m.slice_row(0, 0).1, vec![6.0, 1.0, 0.0]);
        assert_eq!(m.slice_row(1, 0).1, vec![4.0, 0.0]);
        assert_eq!(m.to_coo(), example_matrix());
    }

    #[test]
    fn sorted_sell_example() {
        let m = to_sell(&example_matrix(), 2, 4).unwrap();
        assert_eq!(m.perm(), &[1, 0, 3, 2]);
        assert_eq!(m.slices(), &[3, 2]);
        assert_eq!(m.slice_row(0, 0), (vec![0, 2, 3], vec![2.0, 8.0, 3.0]));
        assert_eq!(m.slice_row(0, 1).1, vec![6.0, 1.0, 0.0]);
        assert_eq!(valid_prefix(&m, 1, 0), (vec![1, 2], vec![7.0, 5.0]));
        assert_eq!(valid_prefix(&m, 1, 1), (vec![2], vec![4.0]));
        assert_eq!(m.to_coo(), example_matrix());
    }

    #[test]
    fn short_last_slice() {
        let a = CooMatrix::from_triplets(2, 2, [(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let m = to_sell(&a, 4, 0).unwrap();
        assert_eq!(m.num_slices(), 1);
        assert_eq!(m.slice_rows(0), 0..2);
        assert_eq!(m.to_coo(), a);
    }

    #[test]
    fn rejects_bad_window() {
        assert_eq!(
            to_sell(&example_matrix(), 2, 3),
            Err(FormatError::InvalidSortWindow { c: 2, sigma: 3 })
        );
        assert_eq!(to_sell(&example_matrix(), 0, 0), Err(FormatError::InvalidSliceHeight));
    }
}
