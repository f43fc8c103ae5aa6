use super::row_ptr;
use crate::matrix::CooMatrix;

/// Compressed sparse row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    ptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn ptr(&self) -> &[usize] {
        &self.ptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut row = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            row.extend(std::iter::repeat_n(i as u32, self.ptr[i + 1] - self.ptr[i]));
        }
        CooMatrix::from_canonical_parts(
            self.n_rows,
            self.n_cols,
            row,
            self.indices.clone(),
            self.data.clone(),
        )
    }
}

pub fn to_csr(a: &CooMatrix) -> CsrMatrix {
    CsrMatrix {
        n_rows: a.n_rows(),
        n_cols: a.n_cols(),
        ptr: row_ptr(a),
        indices: a.cols().to_vec(),
        data: a.data().to_vec(),
    }
}
