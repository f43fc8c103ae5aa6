//! Benchmark harness.
//!
//! For one matrix and format: convert once (untimed), check the kernel against
//! the reference product, run warmup repetitions, then time repetitions until
//! the Student-t confidence interval on the mean is narrower than `ci_gap`
//! relative to the mean (or `max_reps` is reached). A fixed repetition count
//! can be forced instead with `fixed_reps`.

mod bytes;
mod clock;
mod stats;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{error, warn};
use thiserror::Error;

pub use bytes::{bandwidth_estimate, bytes_moved};
pub use clock::{Clock, ClockSource, ConstantClock, SequenceClock, WallClock, WallClockSource};
pub use stats::{interval_is_tight, t_critical, t_interval, Interval};

use crate::formats::{convert, FormatParams, FormatTag};
use crate::kernels::{spmv_into, Executor, KernelError};
use crate::matrix::{dense_spmv_oracle, read_matrix_market_file, CooMatrix};
use crate::textrec::{content_lines, format_record, Record, RecordError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub min_reps: usize,
    pub max_reps: usize,
    pub ci_level: f64,
    pub ci_gap: f64,
    pub warmup_reps: usize,
    pub workers: usize,
    /// Run exactly this many timed repetitions, ignoring the stopping rule.
    pub fixed_reps: Option<usize>,
    pub params: FormatParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            min_reps: 5,
            max_reps: 1000,
            ci_level: 0.95,
            ci_gap: 0.05,
            warmup_reps: 2,
            workers: 1,
            fixed_reps: None,
            params: FormatParams::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        if self.min_reps < 2 {
            return fail(format!("min_reps must be at least 2, got {}", self.min_reps));
        }
        if self.max_reps < self.min_reps {
            return fail(format!(
                "max_reps ({}) must not be below min_reps ({})",
                self.max_reps, self.min_reps
            ));
        }
        if !(self.ci_gap > 0.0) {
            return fail(format!("ci_gap must be positive, got {}", self.ci_gap));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return fail(format!("ci_level must lie in (0, 1), got {}", self.ci_level));
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if self.fixed_reps == Some(0) {
            return fail("fixed_reps must be positive".into());
        }
        Ok(())
    }
}

/// One (matrix, format) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub matrix_id: String,
    pub format: FormatTag,
    pub reps: usize,
    pub mean_time: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub gflops: f64,
    pub bandwidth: f64,
    pub converted_ok: bool,
    /// Mean time under 100x the clock resolution. Not serialized.
    pub timer_limited: bool,
}

impl BenchRecord {
    fn failed(matrix_id: &str, format: FormatTag) -> Self {
        BenchRecord {
            matrix_id: matrix_id.to_string(),
            format,
            reps: 0,
            mean_time: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            gflops: 0.0,
            bandwidth: 0.0,
            converted_ok: false,
            timer_limited: false,
        }
    }
}

impl fmt::Display for BenchRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_record(&[
            ("matrix_id", &self.matrix_id),
            ("format", &self.format),
            ("reps", &self.reps),
            ("mean_time_s", &self.mean_time),
            ("ci_low_s", &self.ci_low),
            ("ci_high_s", &self.ci_high),
            ("gflops", &self.gflops),
            ("bandwidth_bps", &self.bandwidth),
            ("converted_ok", &self.converted_ok),
        ]))
    }
}

/// `2 nnz / (1e9 t)`: one multiply and one add per nonzero.
pub fn gflops(nnz: usize, seconds: f64) -> f64 {
    (2 * nnz) as f64 / (seconds * 1e9)
}

pub fn write_records<W: Write>(records: &[BenchRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

pub fn parse_records(text: &str) -> Result<Vec<BenchRecord>, RecordError> {
    content_lines(text)
        .map(|(line, l)| {
            let rec = Record::parse(l, line)?;
            Ok(BenchRecord {
                matrix_id: rec.raw("matrix_id")?.to_string(),
                format: rec.get("format")?,
                reps: rec.get("reps")?,
                mean_time: rec.get("mean_time_s")?,
                ci_low: rec.get("ci_low_s")?,
                ci_high: rec.get("ci_high_s")?,
                gflops: rec.get("gflops")?,
                bandwidth: rec.get("bandwidth_bps")?,
                converted_ok: rec.get("converted_ok")?,
                timer_limited: false,
            })
        })
        .collect()
}

/// Fastest successfully measured format; ties go to the earlier [`FormatTag`].
pub fn best_format<'a, I>(records: I) -> Option<FormatTag>
where
    I: IntoIterator<Item = &'a BenchRecord>,
{
    records
        .into_iter()
        .filter(|r| r.converted_ok && r.mean_time.is_finite())
        .min_by(|a, b| a.mean_time.total_cmp(&b.mean_time).then(a.format.cmp(&b.format)))
        .map(|r| r.format)
}

/// Benchmarks matrices with a fixed configuration and worker pool.
#[derive(Debug)]
pub struct Bencher {
    cfg: BenchConfig,
    exec: Executor,
}

impl Bencher {
    pub fn new(cfg: BenchConfig) -> Result<Self, BenchError> {
        cfg.validate()?;
        let exec = Executor::with_workers(cfg.workers)?;
        Ok(Bencher { cfg, exec })
    }

    pub fn config(&self) -> &BenchConfig {
        &self.cfg
    }

    pub fn run(&self, matrix_id: &str, a: &CooMatrix, tag: FormatTag, clock: &mut dyn Clock) -> BenchRecord {
        let cfg = &self.cfg;
        let m = match convert(a, tag, &cfg.params) {
            Ok(m) => m,
            Err(e) => {
                error!("{matrix_id}: {tag} conversion failed: {e}");
                return BenchRecord::failed(matrix_id, tag);
            }
        };
        let x = vec![1.0; a.n_cols()];
        let mut y = vec![0.0; a.n_rows()];
        let reference = dense_spmv_oracle(a, &x).expect("x sized to n_cols");
        if let Err(e) = spmv_into(&m, &x, &mut y, &self.exec) {
            error!("{matrix_id}: {tag} kernel failed: {e}");
            return BenchRecord::failed(matrix_id, tag);
        }
        if let Some(i) = (0..y.len()).find(|&i| (y[i] - reference[i]).abs() > 1e-12 * (1.0 + reference[i].abs())) {
            error!("{matrix_id}: {tag} result differs from reference at row {i}");
            return BenchRecord::failed(matrix_id, tag);
        }

        let exec = &self.exec;
        let mut run = || {
            spmv_into(&m, &x, &mut y, exec).expect("dimensions checked above");
        };
        for _ in 0..cfg.warmup_reps {
            run();
        }

        let mut samples = Vec::new();
        let interval = loop {
            samples.push(clock.time(&mut run));
            let n = samples.len();
            match cfg.fixed_reps {
                Some(fixed) if n >= fixed => break t_interval(&samples, cfg.ci_level),
                Some(_) => continue,
                None => {}
            }
            if n < cfg.min_reps {
                continue;
            }
            let iv = t_interval(&samples, cfg.ci_level);
            if n >= cfg.max_reps || interval_is_tight(&iv, cfg.ci_gap) {
                break iv;
            }
        };

        let mean = interval.mean;
        let timer_limited = mean < 100.0 * clock.resolution();
        if timer_limited {
            warn!("{matrix_id}: {tag} mean time {mean:e}s is below 100x the timer resolution");
        }
        BenchRecord {
            matrix_id: matrix_id.to_string(),
            format: tag,
            reps: samples.len(),
            mean_time: mean,
            ci_low: interval.low,
            ci_high: interval.high,
            gflops: gflops(a.nnz(), mean),
            bandwidth: bandwidth_estimate(&m, mean),
            converted_ok: true,
            timer_limited,
        }
    }
}

/// Benchmarks one matrix in one format.
pub fn run_bench(
    matrix_id: &str,
    a: &CooMatrix,
    tag: FormatTag,
    cfg: &BenchConfig,
    clock: &mut dyn Clock,
) -> Result<BenchRecord, BenchError> {
    Ok(Bencher::new(cfg.clone())?.run(matrix_id, a, tag, clock))
}

/// Records and best-format labels for a set of matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusBench {
    pub records: Vec<BenchRecord>,
    pub labels: Vec<(String, FormatTag)>,
    pub diagnostics: Vec<String>,
}

impl CorpusBench {
    fn bench_one(&mut self, bencher: &Bencher, id: &str, a: &CooMatrix, formats: &[FormatTag], clocks: &mut dyn ClockSource) {
        let start = self.records.len();
        for &tag in formats {
            let mut clock = clocks.clock_for(id, a, tag);
            self.records.push(bencher.run(id, a, tag, clock.as_mut()));
        }
        match best_format(&self.records[start..]) {
            Some(tag) => self.labels.push((id.to_string(), tag)),
            None => self.diagnostics.push(format!("{id}: no format produced a valid measurement")),
        }
    }
}

/// Benchmarks in-memory matrices, one at a time, in the given order.
pub fn bench_matrices<I>(
    matrices: I,
    cfg: &BenchConfig,
    formats: &[FormatTag],
    clocks: &mut dyn ClockSource,
) -> Result<CorpusBench, BenchError>
where
    I: IntoIterator<Item = (String, CooMatrix)>,
{
    let bencher = Bencher::new(cfg.clone())?;
    let mut out = CorpusBench::default();
    for (id, a) in matrices {
        out.bench_one(&bencher, &id, &a, formats, clocks);
    }
    Ok(out)
}

/// All `*.mtx` files under `dir`, recursively, in lexicographic path order.
pub fn discover_corpus(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).follow_links(true) {
        let entry = entry.map_err(io::Error::other)?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) {
            files.push(entry.into_path());
        }
    }
    files.sort();
    Ok(files)
}

/// Identifier of a corpus file: its path relative to the corpus root without
/// the extension, `/`-separated, with whitespace replaced by `_`.
pub fn matrix_id(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).unwrap_or(file).with_extension("");
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

/// Benchmarks every Matrix Market file under `dir`. Unreadable files are
/// skipped with a diagnostic.
pub fn bench_corpus(
    dir: &Path,
    cfg: &BenchConfig,
    formats: &[FormatTag],
    clocks: &mut dyn ClockSource,
) -> Result<CorpusBench, BenchError> {
    let bencher = Bencher::new(cfg.clone())?;
    let mut out = CorpusBench::default();
    for file in discover_corpus(dir)? {
        let id = matrix_id(dir, &file);
        match read_matrix_market_file(&file) {
            Ok(a) => out.bench_one(&bencher, &id, &a, formats, clocks),
            Err(e) => {
                warn!("skipping {}: {e}", file.display());
                out.diagnostics.push(format!("{}: {e}", file.display()));
            }
        }
    }
    Ok(out)
}
