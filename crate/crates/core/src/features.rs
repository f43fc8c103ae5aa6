//! Static matrix features and min-max scaling.
//!
//! All eight features depend only on the sparsity structure, so they can be
//! computed without running any kernel. `variation` is the coefficient of
//! variation of the per-row nonzero counts (population standard deviation
//! over mean), a dimensionless measure of row-length regularity.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::matrix::{row_nnz_histogram, CooMatrix};
use crate::textrec::{content_lines, format_record, Record, RecordError};

pub const NUM_FEATURES: usize = 8;

/// Feature names in vector order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "n_rows",
    "n_cols",
    "nnz_frac",
    "nnz_min",
    "nnz_max",
    "nnz_avg",
    "nnz_std",
    "variation",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot extract features from a {n_rows}x{n_cols} matrix")]
    ZeroDimension { n_rows: usize, n_cols: usize },
    #[error("no feature vectors to fit scaling on")]
    EmptySet,
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz_frac: f64,
    pub nnz_min: usize,
    pub nnz_max: usize,
    pub nnz_avg: f64,
    pub nnz_std: f64,
    pub variation: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.n_rows as f64,
            self.n_cols as f64,
            self.nnz_frac,
            self.nnz_min as f64,
            self.nnz_max as f64,
            self.nnz_avg,
            self.nnz_std,
            self.variation,
        ]
    }
}

pub fn extract_features(a: &CooMatrix) -> Result<FeatureVector, FeatureError> {
    let (n_rows, n_cols) = (a.n_rows(), a.n_cols());
    if n_rows == 0 || n_cols == 0 {
        return Err(FeatureError::ZeroDimension { n_rows, n_cols });
    }
    let counts = row_nnz_histogram(a);
    let nnz = a.nnz();
    let avg = nnz as f64 / n_rows as f64;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - avg;
            d * d
        })
        .sum::<f64>()
        / n_rows as f64;
    let std = var.sqrt();
    Ok(FeatureVector {
        n_rows,
        n_cols,
        nnz_frac: nnz as f64 / (n_rows as f64 * n_cols as f64),
        nnz_min: counts.iter().copied().min().unwrap_or(0),
        nnz_max: counts.iter().copied().max().unwrap_or(0),
        nnz_avg: avg,
        nnz_std: std,
        variation: if avg > 0.0 { std / avg } else { 0.0 },
    })
}

/// Per-feature minimum and maximum observed in a training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub min: [f64; NUM_FEATURES],
    pub max: [f64; NUM_FEATURES],
}

impl ScalingParams {
    /// Fits on raw feature arrays.
    pub fn fit_arrays<'a, I>(rows: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = &'a [f64; NUM_FEATURES]>,
    {
        let mut iter = rows.into_iter();
        let first = iter.next().ok_or(FeatureError::EmptySet)?;
        let (mut min, mut max) = (*first, *first);
        for row in iter {
            for i in 0..NUM_FEATURES {
                min[i] = min[i].min(row[i]);
                max[i] = max[i].max(row[i]);
            }
        }
        Ok(ScalingParams { min, max })
    }

    /// Maps each feature to `[0, 1]`; constant features map to 0 and values
    /// outside the fitted range are clamped.
    pub fn apply_array(&self, raw: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        for i in 0..NUM_FEATURES {
            let span = self.max[i] - self.min[i];
            out[i] = if span > 0.0 {
                ((raw[i] - self.min[i]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        out
    }
}

pub fn fit_scaling(features: &[FeatureVector]) -> Result<ScalingParams, FeatureError> {
    let arrays: Vec<_> = features.iter().map(FeatureVector::to_array).collect();
    ScalingParams::fit_arrays(&arrays)
}

pub fn apply_scaling(f: &FeatureVector, p: &ScalingParams) -> [f64; NUM_FEATURES] {
    p.apply_array(&f.to_array())
}

/// A matrix identifier paired with its features, one line of a feature dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub matrix_id: String,
    pub features: FeatureVector,
}

impl fmt::Display for FeatureRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.features;
        f.write_str(&format_record(&[
            ("matrix_id", &self.matrix_id),
            ("n_rows", &v.n_rows),
            ("n_cols", &v.n_cols),
            ("nnz_frac", &v.nnz_frac),
            ("nnz_min", &v.nnz_min),
            ("nnz_max", &v.nnz_max),
            ("nnz_avg", &v.nnz_avg),
            ("nnz_std", &v.nnz_std),
            ("variation", &v.variation),
        ]))
    }
}

pub fn write_feature_records<W: Write>(records: &[FeatureRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

pub fn parse_feature_records(text: &str) -> Result<Vec<FeatureRecord>, FeatureError> {
    content_lines(text)
        .map(|(line, l)| {
            let rec = Record::parse(l, line)?;
            Ok(FeatureRecord {
                matrix_id: rec.raw("matrix_id")?.to_string(),
                features: FeatureVector {
                    n_rows: rec.get("n_rows")?,
                    n_cols: rec.get("n_cols")?,
                    nnz_frac: rec.get("nnz_frac")?,
                    nnz_min: rec.get("nnz_min")?,
                    nnz_max: rec.get("nnz_max")?,
                    nnz_avg: rec.get("nnz_avg")?,
                    nnz_std: rec.get("nnz_std")?,
                    variation: rec.get("variation")?,
                },
            })
        })
        .collect()
}
