use super::EllMatrix;
use crate::matrix::{row_nnz_histogram, CooMatrix};

/// ELL part of width `K` plus a COO tail holding each long row's overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct HybMatrix {
    ell: EllMatrix,
    tail: CooMatrix,
}

impl HybMatrix {
    pub fn ell(&self) -> &EllMatrix {
        &self.ell
    }

    pub fn tail(&self) -> &CooMatrix {
        &self.tail
    }

    pub fn k(&self) -> usize {
        self.ell.k()
    }

    pub fn n_rows(&self) -> usize {
        self.ell.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.ell.n_cols()
    }

    pub fn nnz(&self) -> usize {
        self.ell.nnz() + self.tail.nnz()
    }

    pub fn to_coo(&self) -> CooMatrix {
        let ell = self.ell.to_coo();
        let mut merged = Vec::with_capacity(self.nnz());
        let (mut a, mut b) = (ell.iter().peekable(), self.tail.iter().peekable());
        loop {
            let take_ell = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => (x.0, x.1) < (y.0, y.1),
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            merged.push(if take_ell { a.next() } else { b.next() }.unwrap());
        }
        let row = merged.iter().map(|e| e.0 as u32).collect();
        let col = merged.iter().map(|e| e.1 as u32).collect();
        let data = merged.iter().map(|e| e.2).collect();
        CooMatrix::from_canonical_parts(self.n_rows(), self.n_cols(), row, col, data)
    }
}

/// Typical row length for the ELL part: the largest `K >= 1` such that more
/// than a third of the rows hold at least `K` nonzeros; 1 when no `K` does.
pub fn hyb_typical_k(row_nnz: &[usize]) -> usize {
    let n = row_nnz.len();
    let mut sorted = row_nnz.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    // Rows with >= K nonzeros number more than n/3 iff the (n/3 + 1)-th longest row has >= K.
    let needed = n / 3 + 1;
    match sorted.get(needed - 1) {
        Some(&k) if k >= 1 => k,
        _ => 1,
    }
}

pub fn to_hyb(a: &CooMatrix) -> HybMatrix {
    let k = hyb_typical_k(&row_nnz_histogram(a));
    let (ell, overflow) = EllMatrix::with_width(a, k);
    let row = overflow.iter().map(|&p| a.rows()[p]).collect();
    let col = overflow.iter().map(|&p| a.cols()[p]).collect();
    let data = overflow.iter().map(|&p| a.data()[p]).collect();
    HybMatrix {
        ell,
        tail: CooMatrix::from_canonical_parts(a.n_rows(), a.n_cols(), row, col, data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::example_matrix;

    /// Direct scan over every candidate K, largest first.
    fn brute_force_k(row_nnz: &[usize]) -> usize {
        let max = row_nnz.iter().copied().max().unwrap_or(0);
        (1..=max)
            .rev()
            .find(|&k| 3 * row_nnz.iter().filter(|&&r| r >= k).count() > row_nnz.len())
            .unwrap_or(1)
    }

    #[test]
    fn typical_k_examples() {
        assert_eq!(hyb_typical_k(&[2, 3, 1, 2]), 2);
        assert_eq!(hyb_typical_k(&[5, 5, 5, 5]), 5);
        assert_eq!(hyb_typical_k(&[1, 1, 1, 100]), 1);
        assert_eq!(hyb_typical_k(&[10, 0, 0]), 1);
        assert_eq!(hyb_typical_k(&[0, 0, 0]), 1);
    }

    #[test]
    fn typical_k_matches_scan() {
        let cases: &[&[usize]] = &[
            &[0],
            &[7],
            &[3, 3, 0],
            &[4, 4, 1, 0, 0, 0],
            &[9, 8, 7, 6, 5, 4, 3, 2, 1],
            &[2, 2, 2, 0, 0, 0, 0],
            &[1, 6, 6, 2, 2, 2, 9],
        ];
        for &c in cases {
            assert_eq!(hyb_typical_k(c), brute_force_k(c), "{c:?}");
        }
    }

    #[test]
    fn example_split() {
        let m = to_hyb(&example_matrix());
        assert_eq!(m.k(), 2);
        assert_eq!(m.ell().row(0), (&[1u32, 2][..], &[6.0, 1.0][..]));
        assert_eq!(m.ell().row(1), (&[0u32, 2][..], &[2.0, 8.0][..]));
        assert_eq!(m.ell().row(2).1, &[4.0, 0.0]);
        assert_eq!(m.ell().row(3), (&[1u32, 2][..], &[7.0, 5.0][..]));
        assert_eq!(m.tail().iter().collect::<Vec<_>>(), vec![(1, 3, 3.0)]);
        assert_eq!(m.to_coo(), example_matrix());
    }

    #[test]
    fn no_tail_when_rows_fit() {
        let a = CooMatrix::from_triplets(3, 3, (0..3).map(|i| (i, i, 1.0))).unwrap();
        let m = to_hyb(&a);
        assert_eq!(m.tail().nnz(), 0);
    }

    #[test]
    fn single_long_row() {
        let a = CooMatrix::from_triplets(3, 10, (0..10).map(|c| (0, c, 1.0))).unwrap();
        let m = to_hyb(&a);
        assert_eq!(m.k(), 1);
        assert_eq!(m.tail().nnz(), 9);
        assert_eq!(m.to_coo(), a);
    }

    #[test]
    fn empty_matrix() {
        let a = CooMatrix::empty(3, 3).unwrap();
        assert_eq!(to_hyb(&a).to_coo(), a);
    }
}
