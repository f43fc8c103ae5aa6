use std::time::Instant;

use crate::formats::FormatTag;
use crate::matrix::CooMatrix;

/// Measures one timed repetition.
///
/// The harness never reads the system time directly, so tests can substitute
/// a deterministic clock.
pub trait Clock {
    /// Runs `run` once and returns the elapsed time in seconds.
    fn time(&mut self, run: &mut dyn FnMut()) -> f64;

    /// Smallest interval the clock can resolve, in seconds (0 if exact).
    fn resolution(&self) -> f64 {
        0.0
    }
}

/// Monotonic wall-clock timing.
#[derive(Debug, Clone)]
pub struct WallClock {
    resolution: f64,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock {
            resolution: estimate_resolution(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn time(&mut self, run: &mut dyn FnMut()) -> f64 {
        let start = Instant::now();
        run();
        start.elapsed().as_secs_f64()
    }

    fn resolution(&self) -> f64 {
        self.resolution
    }
}

/// Smallest nonzero difference between consecutive `Instant::now()` readings.
fn estimate_resolution() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min((b - a).as_secs_f64());
    }
    best
}

/// Reports the same duration for every repetition.
#[derive(Debug, Clone, Copy)]
pub struct ConstantClock {
    pub seconds: f64,
}

impl Clock for ConstantClock {
    fn time(&mut self, run: &mut dyn FnMut()) -> f64 {
        run();
        self.seconds
    }
}

/// Replays a fixed list of durations, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct SequenceClock {
    samples: Vec<f64>,
    next: usize,
}

impl SequenceClock {
    pub fn new(samples: Vec<f64>) -> Self {
        assert!(!samples.is_empty(), "sequence clock needs at least one sample");
        SequenceClock { samples, next: 0 }
    }

    /// Number of repetitions timed so far.
    pub fn calls(&self) -> usize {
        self.next
    }
}

impl Clock for SequenceClock {
    fn time(&mut self, run: &mut dyn FnMut()) -> f64 {
        run();
        let t = self.samples[self.next % self.samples.len()];
        self.next += 1;
        t
    }
}

/// Hands out a clock for each (matrix, format) measurement.
pub trait ClockSource {
    fn clock_for(&mut self, matrix_id: &str, a: &CooMatrix, tag: FormatTag) -> Box<dyn Clock>;
}

/// Wall-clock timing for every measurement.
#[derive(Debug, Default)]
pub struct WallClockSource {
    clock: Option<WallClock>,
}

impl ClockSource for WallClockSource {
    fn clock_for(&mut self, _: &str, _: &CooMatrix, _: FormatTag) -> Box<dyn Clock> {
        Box::new(self.clock.get_or_insert_with(WallClock::new).clone())
    }
}

impl<F> ClockSource for F
where
    F: FnMut(&str, &CooMatrix, FormatTag) -> Box<dyn Clock>,
{
    fn clock_for(&mut self, matrix_id: &str, a: &CooMatrix, tag: FormatTag) -> Box<dyn Clock> {
        self(matrix_id, a, tag)
    }
}
