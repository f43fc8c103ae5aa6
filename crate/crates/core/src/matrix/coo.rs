use super::{MatrixError, MAX_INDEX};

/// A sparse matrix in canonical coordinate form.
///
/// Entries are sorted by `(row, col)`, contain no duplicate coordinates and no
/// explicitly stored zeros. Every constructor enforces this, so the struct is
/// always canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    n_rows: usize,
    n_cols: usize,
    row: Vec<u32>,
    col: Vec<u32>,
    data: Vec<f64>,
}

fn check_dims(n_rows: usize, n_cols: usize) -> Result<(), MatrixError> {
    if n_rows > MAX_INDEX {
        return Err(MatrixError::TooLarge {
            what: "n_rows",
            value: n_rows,
        });
    }
    if n_cols > MAX_INDEX {
        return Err(MatrixError::TooLarge {
            what: "n_cols",
            value: n_cols,
        });
    }
    Ok(())
}

impl CooMatrix {
    /// Builds a canonical matrix from unsorted triplets: sorts by `(row, col)`,
    /// sums duplicates and drops entries that are (or sum to) zero.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<Self, MatrixError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        check_dims(n_rows, n_cols)?;
        let mut triplets = Vec::new();
        for (r, c, v) in entries {
            if r >= n_rows || c >= n_cols {
                return Err(MatrixError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
            triplets.push((r as u32, c as u32, v));
        }
        // Stable sort keeps duplicates in input order, so their sum is reproducible.
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row = Vec::with_capacity(triplets.len());
        let mut col = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if (r2, c2) != (r, c) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v != 0.0 {
                row.push(r);
                col.push(c);
                data.push(v);
            }
        }
        if data.len() > MAX_INDEX {
            return Err(MatrixError::TooLarge {
                what: "nnz",
                value: data.len(),
            });
        }
        Ok(CooMatrix {
            n_rows,
            n_cols,
            row,
            col,
            data,
        })
    }

    /// Wraps arrays that are already canonical. Only checked in debug builds.
    pub(crate) fn from_canonical_parts(
        n_rows: usize,
        n_cols: usize,
        row: Vec<u32>,
        col: Vec<u32>,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row.len(), col.len());
        debug_assert_eq!(row.len(), data.len());
        debug_assert!(row
            .iter()
            .zip(&col)
            .zip(row.iter().zip(&col).skip(1))
            .all(|(a, b)| a < b));
        debug_assert!(data.iter().all(|&v| v != 0.0));
        CooMatrix {
            n_rows,
            n_cols,
            row,
            col,
            data,
        }
    }

    /// An `n_rows x n_cols` matrix without nonzeros.
    pub fn empty(n_rows: usize, n_cols: usize) -> Result<Self, MatrixError> {
        check_dims(n_rows, n_cols)?;
        Ok(Self::from_canonical_parts(
            n_rows,
            n_cols,
            Vec::new(),
            Vec::new(),
            Vec::new(),
        ))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn rows(&self) -> &[u32] {
        &self.row
    }

    pub fn cols(&self) -> &[u32] {
        &self.col
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Iterates `(row, col, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.row
            .iter()
            .zip(&self.col)
            .zip(&self.data)
            .map(|((&r, &c), &v)| (r as usize, c as usize, v))
    }
}

/// Canonicalizes an unsorted triplet list. Equivalent to [`CooMatrix::from_triplets`].
pub fn canonicalize(
    entries: impl IntoIterator<Item = (usize, usize, f64)>,
    n_rows: usize,
    n_cols: usize,
) -> Result<CooMatrix, MatrixError> {
    CooMatrix::from_triplets(n_rows, n_cols, entries)
}

/// Reference SpMV: accumulates `data[k] * x[col[k]]` into `y[row[k]]` in
/// ascending `k`, starting from zero. Every kernel is checked against this.
pub fn dense_spmv_oracle(a: &CooMatrix, x: &[f64]) -> Result<Vec<f64>, MatrixError> {
    if x.len() != a.n_cols {
        return Err(MatrixError::DimensionMismatch {
            expected: a.n_cols,
            found: x.len(),
        });
    }
    let mut y = vec![0.0; a.n_rows];
    for (r, c, v) in a.iter() {
        y[r] += v * x[c];
    }
    Ok(y)
}

/// The 4x4 matrix with 8 nonzeros used as the worked example in the docs and tests.
///
/// ```text
/// [0 6 1 0]
/// [2 0 8 3]
/// [0 0 4 0]
/// [0 7 5 0]
/// ```
pub fn example_matrix() -> CooMatrix {
    let entries = [
        (0, 1, 6.0),
        (0, 2, 1.0),
        (1, 0, 2.0),
        (1, 2, 8.0),
        (1, 3, 3.0),
        (2, 2, 4.0),
        (3, 1, 7.0),
        (3, 2, 5.0),
    ];
    CooMatrix::from_triplets(4, 4, entries).expect("example entries are in bounds")
}

/// Number of nonzeros in each row.
pub fn row_nnz_histogram(a: &CooMatrix) -> Vec<usize> {
    let mut counts = vec![0usize; a.n_rows];
    for &r in &a.row {
        counts[r as usize] += 1;
    }
    counts
}
