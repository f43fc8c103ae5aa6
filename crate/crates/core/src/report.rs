//! Aggregate tables over benchmark records: how often each format wins, and
//! the average slowdown of committing to one format for every matrix.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bench::{best_format, BenchRecord};
use crate::formats::FormatTag;

const N: usize = FormatTag::ALL.len();

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("no matrix has a successful measurement")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Matrices with at least one successful measurement.
    pub matrices: usize,
    pub wins: [usize; N],
    /// `100 * wins / matrices`.
    pub win_percent: [f64; N],
    /// Geometric mean of `time / best_time` over the matrices where the
    /// format ran; `None` if it never did.
    pub slowdown: [Option<f64>; N],
    /// Matrices each format failed on.
    pub failures: [usize; N],
}

pub fn aggregate(records: &[BenchRecord]) -> Result<Report, ReportError> {
    let mut order = Vec::new();
    let mut groups: HashMap<&str, Vec<&BenchRecord>> = HashMap::new();
    for r in records {
        groups
            .entry(&r.matrix_id)
            .or_insert_with(|| {
                order.push(r.matrix_id.as_str());
                Vec::new()
            })
            .push(r);
    }

    let mut wins = [0; N];
    let mut log_sum = [0.0; N];
    let mut counted = [0usize; N];
    let mut failures = [0; N];
    let mut matrices = 0;
    for id in order {
        let group = &groups[id];
        let Some(best) = best_format(group.iter().copied()) else {
            continue;
        };
        matrices += 1;
        wins[best.index()] += 1;
        let best_time = group
            .iter()
            .find(|r| r.format == best && r.converted_ok)
            .map(|r| r.mean_time)
            .expect("best format has a record");
        for tag in FormatTag::ALL {
            match group.iter().find(|r| r.format == tag && r.converted_ok && r.mean_time.is_finite()) {
                Some(r) => {
                    log_sum[tag.index()] += (r.mean_time / best_time).log2();
                    counted[tag.index()] += 1;
                }
                None => failures[tag.index()] += 1,
            }
        }
    }
    if matrices == 0 {
        return Err(ReportError::Empty);
    }
    Ok(Report {
        matrices,
        wins,
        win_percent: wins.map(|w| 100.0 * w as f64 / matrices as f64),
        slowdown: std::array::from_fn(|i| (counted[i] > 0).then(|| (log_sum[i] / counted[i] as f64).exp2())),
        failures,
    })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "matrices: {}", self.matrices);
        let _ = writeln!(s, "{:<6} {:>6} {:>8} {:>10} {:>8}", "format", "wins", "percent", "slowdown", "failed");
        for tag in FormatTag::ALL {
            let i = tag.index();
            let slow = match self.slowdown[i] {
                Some(v) => format!("{v:.3}x"),
                None => "-".into(),
            };
            let _ = writeln!(
                s,
                "{:<6} {:>6} {:>7.2}% {:>10} {:>8}",
                tag.name(),
                self.wins[i],
                self.win_percent[i],
                slow,
                self.failures[i]
            );
        }
        f.write_str(&s)
    }
}
