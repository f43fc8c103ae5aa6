use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use super::KernelError;

/// Runs kernel tasks either inline or on a dedicated worker pool.
pub struct Executor {
    pool: Option<ThreadPool>,
    workers: usize,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("workers", &self.workers)
            .field("parallel", &self.pool.is_some())
            .finish()
    }
}

impl Executor {
    /// Single-threaded reference mode.
    pub fn sequential() -> Self {
        Executor {
            pool: None,
            workers: 1,
        }
    }

    /// A pool of `workers` threads. One worker still uses the pool.
    pub fn parallel(workers: usize) -> Result<Self, KernelError> {
        if workers == 0 {
            return Err(KernelError::NoWorkers);
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("spmv-worker-{i}"))
            .build()
            .map_err(|e| KernelError::Pool(e.to_string()))?;
        Ok(Executor {
            pool: Some(pool),
            workers,
        })
    }

    /// `sequential()` for 1 worker, `parallel(workers)` otherwise.
    pub fn with_workers(workers: usize) -> Result<Self, KernelError> {
        match workers {
            0 => Err(KernelError::NoWorkers),
            1 => Ok(Self::sequential()),
            n => Self::parallel(n),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        self.pool.is_some()
    }

    /// Evaluates `f(0..n)` and returns the results in task order.
    pub(crate) fn map_tasks<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    /// Hands each `chunk`-sized piece of `out` (the last may be shorter) to `f`
    /// along with its chunk index.
    pub(crate) fn for_each_chunk<F>(&self, out: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        match &self.pool {
            None => out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
            Some(pool) => pool.install(|| {
                out.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            }),
        }
    }
}
