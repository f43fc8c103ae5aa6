use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean and two-sided Student-t confidence interval of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    /// `(high - low) / mean`; 0 for a degenerate interval.
    pub fn relative_width(&self) -> f64 {
        let width = self.high - self.low;
        if width == 0.0 {
            0.0
        } else if self.mean > 0.0 {
            width / self.mean
        } else {
            f64::INFINITY
        }
    }
}

/// Two-sided critical value `t_{(1+level)/2, df}`.
pub fn t_critical(level: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(0.5 + level / 2.0)
}

/// Student-t interval on the mean. With fewer than two samples the interval
/// collapses to the mean.
pub fn t_interval(samples: &[f64], level: f64) -> Interval {
    let n = samples.len();
    if n == 0 {
        return Interval {
            mean: f64::NAN,
            low: f64::NAN,
            high: f64::NAN,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Interval { mean, low: mean, high: mean };
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Interval { mean, low: mean, high: mean };
    }
    let half = t_critical(level, n - 1) * (var / n as f64).sqrt();
    Interval {
        mean,
        low: mean - half,
        high: mean + half,
    }
}

/// The stopping rule: the interval is narrower than `gap` relative to the mean.
pub fn interval_is_tight(interval: &Interval, gap: f64) -> bool {
    interval.relative_width() < gap
}
