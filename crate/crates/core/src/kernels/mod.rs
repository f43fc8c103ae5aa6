//! SpMV kernels, one per storage format.
//!
//! Each kernel splits its work into format-specific tasks (row blocks, slices,
//! tiles, tail chunks) and runs them on an [`Executor`]. Output rows are owned
//! by exactly one task, except for rows that straddle CSR5 tiles or the HYB
//! tail; those partial sums are staged per task and added into `y` in
//! ascending task order, so a given task decomposition always yields the same
//! bits whether it runs sequentially or on a pool.

mod csr5;
mod exec;

use std::ops::Range;

use thiserror::Error;

pub use csr5::csr5_tile_partials;
pub use exec::Executor;

use crate::formats::{CsrMatrix, Csr5Matrix, EllMatrix, FormatMatrix, FormatTag, HybMatrix, SellMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("format mismatch: requested {requested}, matrix is {actual}")]
    TagMismatch { requested: FormatTag, actual: FormatTag },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("failed to build worker pool: {0}")]
    Pool(String),
}

/// A unit of kernel work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpmvTask {
    /// Contiguous rows (CSR, ELL, and the ELL part of HYB).
    Rows(Range<usize>),
    /// Contiguous SELL slices; one sorting window when rows are permuted.
    Slices(Range<usize>),
    /// One CSR5 tile.
    Tile(usize),
    /// A contiguous run of HYB tail entries.
    Tail(Range<usize>),
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), KernelError> {
    if expected != found {
        return Err(KernelError::DimensionMismatch { what, expected, found });
    }
    Ok(())
}

/// Rows per task for row-partitioned kernels: `n_rows / (4 * workers)`, at least 1.
pub fn row_block(n_rows: usize, workers: usize) -> usize {
    (n_rows / (4 * workers.max(1))).max(1)
}

fn row_tasks(n_rows: usize, workers: usize) -> Vec<SpmvTask> {
    let block = row_block(n_rows, workers);
    (0..n_rows)
        .step_by(block)
        .map(|s| SpmvTask::Rows(s..(s + block).min(n_rows)))
        .collect()
}

fn sell_window(m: &SellMatrix) -> usize {
    if m.sigma() > 0 {
        m.sigma()
    } else {
        m.c()
    }
}

fn tail_chunk(tail_nnz: usize, workers: usize) -> usize {
    (tail_nnz / (4 * workers.max(1))).max(1)
}

/// The task decomposition a kernel uses for `m` on `exec`.
pub fn plan(m: &FormatMatrix, exec: &Executor) -> Vec<SpmvTask> {
    let workers = exec.workers();
    match m {
        FormatMatrix::Csr(m) => row_tasks(m.n_rows(), workers),
        FormatMatrix::Ell(m) => row_tasks(m.n_rows(), workers),
        FormatMatrix::Csr5(m) => (0..m.num_tiles()).map(SpmvTask::Tile).collect(),
        FormatMatrix::Sell(m) => {
            let per_window = sell_window(m) / m.c();
            (0..m.num_slices())
                .step_by(per_window)
                .map(|s| SpmvTask::Slices(s..(s + per_window).min(m.num_slices())))
                .collect()
        }
        FormatMatrix::Hyb(m) => {
            let mut tasks = row_tasks(m.n_rows(), workers);
            let nnz = m.tail().nnz();
            let chunk = tail_chunk(nnz, workers);
            tasks.extend((0..nnz).step_by(chunk).map(|s| SpmvTask::Tail(s..(s + chunk).min(nnz))));
            tasks
        }
    }
}

/// Structural nonzeros a task processes (padding excluded).
pub fn task_nnz(m: &FormatMatrix, task: &SpmvTask) -> usize {
    match (m, task) {
        (FormatMatrix::Csr(m), SpmvTask::Rows(r)) => m.ptr()[r.end] - m.ptr()[r.start],
        (FormatMatrix::Ell(m), SpmvTask::Rows(r)) => m.row_len()[r.clone()].iter().map(|&l| l as usize).sum(),
        (FormatMatrix::Hyb(m), SpmvTask::Rows(r)) => m.ell().row_len()[r.clone()].iter().map(|&l| l as usize).sum(),
        (FormatMatrix::Hyb(_), SpmvTask::Tail(r)) => r.len(),
        (FormatMatrix::Csr5(m), SpmvTask::Tile(t)) => m.tile_range(*t).len(),
        (FormatMatrix::Sell(m), SpmvTask::Slices(s)) => {
            let rows = m.slice_rows(s.start).start..m.slice_rows(s.end - 1).end;
            m.row_len()[rows].iter().map(|&l| l as usize).sum()
        }
        _ => 0,
    }
}

pub fn spmv_csr_into(m: &CsrMatrix, x: &[f64], y: &mut [f64], exec: &Executor) -> Result<(), KernelError> {
    check_len("x", m.n_cols(), x.len())?;
    check_len("y", m.n_rows(), y.len())?;
    let (ptr, indices, data) = (m.ptr(), m.indices(), m.data());
    let block = row_block(m.n_rows(), exec.workers());
    exec.for_each_chunk(y, block, |chunk, ys| {
        let first = chunk * block;
        for (i, yi) in ys.iter_mut().enumerate() {
            let span = ptr[first + i]..ptr[first + i + 1];
            let mut sum = 0.0;
            for (&c, &v) in indices[span.clone()].iter().zip(&data[span]) {
                sum += v * x[c as usize];
            }
            *yi = sum;
        }
    });
    Ok(())
}

pub fn spmv_csr(m: &CsrMatrix, x: &[f64], exec: &Executor) -> Result<Vec<f64>, KernelError> {
    let mut y = vec![0.0; m.n_rows()];
    spmv_csr_into(m, x, &mut y, exec)?;
    Ok(y)
}

/// Padded slots multiply 0.0 by a gathered `x` value and so add nothing for finite `x`.
pub fn spmv_ell_into(m: &EllMatrix, x: &[f64], y: &mut [f64], exec: &Executor) -> Result<(), KernelError> {
    check_len("x", m.n_cols(), x.len())?;
    check_len("y", m.n_rows(), y.len())?;
    let k = m.k();
    let (indices, data) = (m.indices(), m.data());
    let block = row_block(m.n_rows(), exec.workers());
    exec.for_each_chunk(y, block, |chunk, ys| {
        let first = chunk * block;
        for (i, yi) in ys.iter_mut().enumerate() {
            let span = (first + i) * k..(first + i + 1) * k;
            let mut sum = 0.0;
            for (&c, &v) in indices[span.clone()].iter().zip(&data[span]) {
                sum += v * x[c as usize];
            }
            *yi = sum;
        }
    });
    Ok(())
}

pub fn spmv_ell(m: &EllMatrix, x: &[f64], exec: &Executor) -> Result<Vec<f64>, KernelError> {
    let mut y = vec![0.0; m.n_rows()];
    spmv_ell_into(m, x, &mut y, exec)?;
    Ok(y)
}

/// Computes one slice in permuted row order; `out[i]` is the result for
/// permuted row `slice_rows(s).start + i`.
pub fn sell_slice_product(m: &SellMatrix, s: usize, x: &[f64], out: &mut [f64]) {
    let h = m.slice_rows(s).len();
    let width = m.slices()[s] as usize;
    let base = m.slice_ptr()[s];
    let (indices, data) = (m.indices(), m.data());
    out[..h].fill(0.0);
    for j in 0..width {
        let col = base + j * h;
        for (i, acc) in out[..h].iter_mut().enumerate() {
            *acc += data[col + i] * x[indices[col + i] as usize];
        }
    }
}

pub fn spmv_sell_into(m: &SellMatrix, x: &[f64], y: &mut [f64], exec: &Executor) -> Result<(), KernelError> {
    check_len("x", m.n_cols(), x.len())?;
    check_len("y", m.n_rows(), y.len())?;
    let window = sell_window(m);
    let per_window = window / m.c();
    let perm = m.perm();
    exec.for_each_chunk(y, window, |w, ys| {
        let first_row = w * window;
        let mut acc = vec![0.0; m.c()];
        let slices = w * per_window..((w + 1) * per_window).min(m.num_slices());
        for s in slices {
            let rows = m.slice_rows(s);
            sell_slice_product(m, s, x, &mut acc);
            for (i, p) in rows.enumerate() {
                ys[perm[p] as usize - first_row] = acc[i];
            }
        }
    });
    Ok(())
}

pub fn spmv_sell(m: &SellMatrix, x: &[f64], exec: &Executor) -> Result<Vec<f64>, KernelError> {
    let mut y = vec![0.0; m.n_rows()];
    spmv_sell_into(m, x, &mut y, exec)?;
    Ok(y)
}

pub fn spmv_hyb_into(m: &HybMatrix, x: &[f64], y: &mut [f64], exec: &Executor) -> Result<(), KernelError> {
    spmv_ell_into(m.ell(), x, y, exec)?;
    let tail = m.tail();
    let nnz = tail.nnz();
    if nnz == 0 {
        return Ok(());
    }
    let chunk = tail_chunk(nnz, exec.workers());
    let (rows, cols, data) = (tail.rows(), tail.cols(), tail.data());
    let staged = exec.map_tasks(nnz.div_ceil(chunk), |t| {
        let mut partials: Vec<(usize, f64)> = Vec::new();
        for e in t * chunk..((t + 1) * chunk).min(nnz) {
            let r = rows[e] as usize;
            let v = data[e] * x[cols[e] as usize];
            match partials.last_mut() {
                Some((last, sum)) if *last == r => *sum += v,
                _ => partials.push((r, 0.0 + v)),
            }
        }
        partials
    });
    for (r, s) in staged.into_iter().flatten() {
        y[r] += s;
    }
    Ok(())
}

pub fn spmv_hyb(m: &HybMatrix, x: &[f64], exec: &Executor) -> Result<Vec<f64>, KernelError> {
    let mut y = vec![0.0; m.n_rows()];
    spmv_hyb_into(m, x, &mut y, exec)?;
    Ok(y)
}

pub fn spmv_csr5_into(m: &Csr5Matrix, x: &[f64], y: &mut [f64], exec: &Executor) -> Result<(), KernelError> {
    check_len("x", m.n_cols(), x.len())?;
    check_len("y", m.n_rows(), y.len())?;
    let staged = exec.map_tasks(m.num_tiles(), |t| csr5_tile_partials(m, t, x));
    y.fill(0.0);
    for (r, s) in staged.into_iter().flatten() {
        y[r] += s;
    }
    Ok(())
}

pub fn spmv_csr5(m: &Csr5Matrix, x: &[f64], exec: &Executor) -> Result<Vec<f64>, KernelError> {
    let mut y = vec![0.0; m.n_rows()];
    spmv_csr5_into(m, x, &mut y, exec)?;
    Ok(y)
}

/// Runs the kernel matching the matrix's format into `y`.
pub fn spmv_into(m: &FormatMatrix, x: &[f64], y: &mut [f64], exec: &Executor) -> Result<(), KernelError> {
    match m {
        FormatMatrix::Csr(m) => spmv_csr_into(m, x, y, exec),
        FormatMatrix::Csr5(m) => spmv_csr5_into(m, x, y, exec),
        FormatMatrix::Ell(m) => spmv_ell_into(m, x, y, exec),
        FormatMatrix::Sell(m) => spmv_sell_into(m, x, y, exec),
        FormatMatrix::Hyb(m) => spmv_hyb_into(m, x, y, exec),
    }
}

/// Dispatches on `tag`, refusing a matrix stored in a different format.
pub fn spmv(tag: FormatTag, m: &FormatMatrix, x: &[f64], exec: &Executor) -> Result<Vec<f64>, KernelError> {
    if m.tag() != tag {
        return Err(KernelError::TagMismatch {
            requested: tag,
            actual: m.tag(),
        });
    }
    let mut y = vec![0.0; m.n_rows()];
    spmv_into(m, x, &mut y, exec)?;
    Ok(y)
}
