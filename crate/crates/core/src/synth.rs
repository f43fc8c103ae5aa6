//! Synthetic matrices and a deterministic cost model standing in for
//! hardware timings.
//!
//! The cost model assigns every format a runtime in nanoseconds computed
//! from static features only (`n` rows, `nnz = n * nnz_avg`, `nnz_max`,
//! `nnz_std`, `variation`):
//!
//! | format | cost |
//! |--------|------|
//! | CSR    | `nnz + 2n + 0.8 nnz min(variation, 1.5)` (row-parallel load imbalance) |
//! | CSR5   | `1.25 nnz + n + 400` (balanced tiles, descriptor overhead) |
//! | ELL    | `0.6 n nnz_max + n` (every row padded to the longest) |
//! | SELL   | `0.7 (nnz + 1.5 n nnz_std) + 2n + 50` (padding within slices) |
//! | HYB    | `0.65 nnz + 2 n nnz_std + 1.5n + 150` (regular part plus COO tail) |
//!
//! So ELL is cheapest on uniform rows, SELL and HYB on moderately irregular
//! rows and CSR5 when a few rows are much longer than the rest.

use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};

use crate::bench::{Clock, ClockSource, ConstantClock};
use crate::features::{extract_features, FeatureVector};
use crate::formats::FormatTag;
use crate::matrix::CooMatrix;

/// Cost model runtime in seconds.
pub fn cost_model_seconds(f: &FeatureVector, tag: FormatTag) -> f64 {
    let n = f.n_rows as f64;
    let nnz = n * f.nnz_avg;
    let ns = match tag {
        FormatTag::Csr => nnz + 2.0 * n + 0.8 * nnz * f.variation.min(1.5),
        FormatTag::Csr5 => 1.25 * nnz + n + 400.0,
        FormatTag::Ell => 0.6 * n * f.nnz_max as f64 + n,
        FormatTag::Sell => 0.7 * (nnz + 1.5 * n * f.nnz_std) + 2.0 * n + 50.0,
        FormatTag::Hyb => 0.65 * nnz + 2.0 * n * f.nnz_std + 1.5 * n + 150.0,
    };
    ns * 1e-9
}

/// Clock source that reports the cost model instead of measuring.
#[derive(Debug, Default, Clone, Copy)]
pub struct CostModelClock;

impl ClockSource for CostModelClock {
    fn clock_for(&mut self, _: &str, a: &CooMatrix, tag: FormatTag) -> Box<dyn Clock> {
        let f = extract_features(a).expect("benchmarked matrices have nonzero dimensions");
        Box::new(ConstantClock {
            seconds: cost_model_seconds(&f, tag),
        })
    }
}

fn value<R: Rng>(rng: &mut R) -> f64 {
    let v: f64 = rng.random_range(-1.0..1.0);
    if v == 0.0 {
        1.0
    } else {
        v
    }
}

/// Builds a matrix whose row `i` holds `lens[i]` distinct random columns.
pub fn from_row_lengths<R: Rng>(rng: &mut R, n_cols: usize, lens: &[usize]) -> CooMatrix {
    let mut entries = Vec::new();
    for (i, &len) in lens.iter().enumerate() {
        for c in sample(rng, n_cols, len.min(n_cols)) {
            entries.push((i, c, value(rng)));
        }
    }
    CooMatrix::from_triplets(lens.len(), n_cols, entries).expect("indices in range")
}

/// Each entry present independently with probability `density`.
pub fn bernoulli_matrix<R: Rng>(rng: &mut R, n_rows: usize, n_cols: usize, density: f64) -> CooMatrix {
    let mut entries = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_cols {
            if rng.random_bool(density) {
                entries.push((i, j, value(rng)));
            }
        }
    }
    CooMatrix::from_triplets(n_rows, n_cols, entries).expect("indices in range")
}

/// `a` with row `row` made fully dense.
pub fn with_dense_row<R: Rng>(rng: &mut R, a: &CooMatrix, row: usize) -> CooMatrix {
    let entries = a
        .iter()
        .filter(|&(r, _, _)| r != row)
        .chain((0..a.n_cols()).map(|c| (row, c, value(rng))))
        .collect::<Vec<_>>();
    CooMatrix::from_triplets(a.n_rows(), a.n_cols(), entries).expect("indices in range")
}

/// One matrix from a mix of structural families: constant rows, jittered
/// rows, heavy-tailed rows, Bernoulli fill and sparse rows with a few dense
/// ones.
pub fn random_matrix<R: Rng>(rng: &mut R) -> CooMatrix {
    let n_rows = rng.random_range(16..=256);
    let n_cols = rng.random_range(16..=256);
    let lens: Vec<usize> = match rng.random_range(0..5) {
        0 => vec![rng.random_range(1..=16); n_rows],
        1 => {
            let k: usize = rng.random_range(2..=16);
            let j = rng.random_range(1..=k / 2 + 1);
            (0..n_rows).map(|_| rng.random_range(k.saturating_sub(j)..=k + j)).collect()
        }
        2 => {
            let alpha: f64 = rng.random_range(1.2..3.0);
            let min: f64 = rng.random_range(1.0..4.0);
            (0..n_rows)
                .map(|_| {
                    let u: f64 = rng.random_range(f64::EPSILON..1.0);
                    (min * u.powf(-1.0 / alpha)) as usize
                })
                .collect()
        }
        3 => {
            let density = rng.random_range(0.001..0.2);
            return bernoulli_matrix(rng, n_rows, n_cols, density);
        }
        _ => {
            let k = rng.random_range(1..=6);
            let mut lens: Vec<usize> = (0..n_rows).map(|_| rng.random_range(0..=k)).collect();
            for _ in 0..rng.random_range(1..=3) {
                let r = rng.random_range(0..n_rows);
                lens[r] = rng.random_range(n_cols / 2..=n_cols);
            }
            lens
        }
    };
    from_row_lengths(rng, n_cols, &lens)
}

/// `count` matrices named `synth/0000`, `synth/0001`, ...; nonempty by construction.
pub fn synthetic_corpus(count: usize, seed: u64) -> Vec<(String, CooMatrix)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = random_matrix(&mut rng);
        if a.nnz() > 0 {
            out.push((format!("synth/{:04}", out.len()), a));
        }
    }
    out
}
