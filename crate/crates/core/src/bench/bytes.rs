//! Memory-traffic models used to report bandwidth.
//!
//! Each model counts the bytes of one SpMV pass: stored values (8 bytes) and
//! column indices (4 bytes) including padding, the format's auxiliary arrays
//! (4 bytes per entry), one read of `x` and one write of `y` (8 bytes each).
//!
//! | format | bytes |
//! |--------|-------|
//! | CSR    | `12 nnz + 4 (n_rows + 1) + 8 n_cols + 8 n_rows` |
//! | CSR5   | CSR + `4 (tiles + 1)` tile pointers + `ceil(nnz / 8)` flag bytes + `8 omega` per tile for `y_off`/`seg_off` |
//! | ELL    | `12 n_rows k + 8 n_cols + 8 n_rows` |
//! | SELL   | `12 * padded slots + 4 (slices + 1)` + `4 n_rows` for the permutation when sorted, + `x`, `y` |
//! | HYB    | ELL part with width `K` + `16 tail_nnz` (row, column, value) |

use crate::formats::FormatMatrix;

fn vector_bytes(n_rows: usize, n_cols: usize) -> usize {
    8 * n_cols + 8 * n_rows
}

/// Bytes moved by one SpMV under the documented model.
pub fn bytes_moved(m: &FormatMatrix) -> usize {
    let xy = vector_bytes(m.n_rows(), m.n_cols());
    match m {
        FormatMatrix::Csr(m) => 12 * m.nnz() + 4 * (m.n_rows() + 1) + xy,
        FormatMatrix::Csr5(m) => {
            12 * m.nnz()
                + 4 * (m.n_rows() + 1)
                + 4 * (m.num_tiles() + 1)
                + m.nnz().div_ceil(8)
                + 8 * m.omega() * m.num_tiles()
                + xy
        }
        FormatMatrix::Ell(m) => 12 * m.n_rows() * m.k() + xy,
        FormatMatrix::Sell(m) => {
            let perm = if m.sigma() > 0 { 4 * m.n_rows() } else { 0 };
            12 * m.slice_ptr().last().copied().unwrap_or(0) + 4 * (m.num_slices() + 1) + perm + xy
        }
        FormatMatrix::Hyb(m) => 12 * m.n_rows() * m.k() + 16 * m.tail().nnz() + xy,
    }
}

/// Bytes per second for one SpMV taking `seconds`.
pub fn bandwidth_estimate(m: &FormatMatrix, seconds: f64) -> f64 {
    bytes_moved(m) as f64 / seconds
}
