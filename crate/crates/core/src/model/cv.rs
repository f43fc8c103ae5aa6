use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;

use super::{fit_model, ModelError, TrainingRecord, DEFAULT_MAX_DEPTH, DEFAULT_MIN_SAMPLES_LEAF, NUM_CLASSES};
use crate::formats::FormatTag;

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    /// Independent reshuffles; every matrix is tested once per repeat.
    pub repeats: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            seed: 0,
            repeats: 1,
            max_depth: DEFAULT_MAX_DEPTH,
            min_samples_leaf: DEFAULT_MIN_SAMPLES_LEAF,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    /// Indices of the held-out records.
    pub test: Vec<usize>,
    pub predictions: Vec<FormatTag>,
    pub accuracy: f64,
    /// Mean of `best_time / predicted_time` over the fold, when timings exist.
    pub perf_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// `confusion[true][predicted]`, summed over all folds and repeats.
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
    /// Mean `best_time / time` of always using each single format, over the
    /// same test predictions. `None` without timings.
    pub fixed_format_ratio: Option<[f64; NUM_CLASSES]>,
    ratios: Vec<f64>,
}

impl CvReport {
    pub fn mean_accuracy(&self) -> f64 {
        let correct: usize = (0..NUM_CLASSES).map(|c| self.confusion[c][c]).sum();
        let total: usize = self.confusion.iter().flatten().sum();
        correct as f64 / total as f64
    }

    pub fn mean_perf_ratio(&self) -> Option<f64> {
        if self.fixed_format_ratio.is_none() || self.ratios.is_empty() {
            return None;
        }
        Some(self.ratios.iter().sum::<f64>() / self.ratios.len() as f64)
    }

    /// Best fixed format and its ratio; ties go to the earlier format.
    pub fn best_fixed_format(&self) -> Option<(FormatTag, f64)> {
        let r = self.fixed_format_ratio?;
        let mut best = 0;
        for i in 1..NUM_CLASSES {
            if r[i] > r[best] {
                best = i;
            }
        }
        Some((FormatTag::from_index(best).expect("index in range"), r[best]))
    }
}

/// `best / times[pick]`, 0 when the picked format has no finite time.
fn ratio(times: &[f64; NUM_CLASSES], pick: FormatTag) -> f64 {
    let best = times.iter().copied().fold(f64::INFINITY, f64::min);
    let t = times[pick.index()];
    if t.is_finite() && t > 0.0 {
        best / t
    } else {
        0.0
    }
}

/// Splits `0..n` into `k` folds after a seeded shuffle. The first `n % k`
/// folds hold one extra index.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut StdRng::seed_from_u64(seed));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = n / k + usize::from(f < n % k);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    folds
}

/// k-fold cross-validation. Scaling is refit on each training portion so the
/// held-out fold never influences it.
pub fn cross_validate(records: &[TrainingRecord], cfg: &CvConfig) -> Result<CvReport, ModelError> {
    let n = records.len();
    if cfg.k < 2 {
        return Err(ModelError::InvalidFolds(cfg.k));
    }
    if n < cfg.k {
        return Err(ModelError::TooFewSamples { k: cfg.k, n });
    }
    let timed = records.iter().all(|r| r.times.is_some());
    let jobs: Vec<(usize, usize, Vec<usize>)> = (0..cfg.repeats.max(1))
        .flat_map(|rep| {
            fold_assignment(n, cfg.k, cfg.seed.wrapping_add(rep as u64))
                .into_iter()
                .enumerate()
                .map(move |(f, test)| (rep, f, test))
        })
        .collect();

    let folds = jobs
        .into_par_iter()
        .map(|(repeat, fold, test)| {
            let mut held = vec![false; n];
            for &i in &test {
                held[i] = true;
            }
            let train: Vec<TrainingRecord> = (0..n).filter(|&i| !held[i]).map(|i| records[i].clone()).collect();
            let model = fit_model(&train, cfg.max_depth, cfg.min_samples_leaf)?;
            let predictions: Vec<FormatTag> = test.iter().map(|&i| model.predict_raw(&records[i].features)).collect();
            let correct = test.iter().zip(&predictions).filter(|(&i, &p)| records[i].label == p).count();
            let perf_ratio = timed.then(|| {
                test.iter()
                    .zip(&predictions)
                    .map(|(&i, &p)| ratio(records[i].times.as_ref().expect("timed"), p))
                    .sum::<f64>()
                    / test.len() as f64
            });
            Ok(FoldResult {
                repeat,
                fold,
                accuracy: correct as f64 / test.len() as f64,
                test,
                predictions,
                perf_ratio,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    let mut confusion = [[0; NUM_CLASSES]; NUM_CLASSES];
    let mut ratios = Vec::new();
    let mut fixed = [0.0; NUM_CLASSES];
    for fold in &folds {
        for (&i, &p) in fold.test.iter().zip(&fold.predictions) {
            confusion[records[i].label.index()][p.index()] += 1;
            if let Some(times) = &records[i].times {
                ratios.push(ratio(times, p));
                for tag in FormatTag::ALL {
                    fixed[tag.index()] += ratio(times, tag);
                }
            }
        }
    }
    let fixed_format_ratio = timed.then(|| fixed.map(|s| s / ratios.len() as f64));
    Ok(CvReport {
        folds,
        confusion,
        fixed_format_ratio,
        ratios,
    })
}
