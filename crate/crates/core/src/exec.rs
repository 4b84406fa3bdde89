//! Indexed data-parallel maps.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which returns results
//! in index order. Work items carry their own RNG streams, so output never depends on
//! the worker count or on scheduling.

/// Number of worker threads requested for a computation. `0` means "use all available".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Workers(pub usize);

impl Default for Workers {
    fn default() -> Self {
        Workers(0)
    }
}

impl Workers {
    pub const SEQUENTIAL: Workers = Workers(1);

    pub fn resolve(self) -> usize {
        if self.0 > 0 {
            self.0
        } else {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        }
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let threads = workers.resolve();
        if threads > 1 && n > 1 {
            use rayon::prelude::*;
            return match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                Err(_) => (0..n).map(f).collect(),
            };
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] but over chunks of `chunk` consecutive indices, which keeps
/// per-item overhead low for cheap bodies.
pub fn map_chunked<T, F>(n: usize, chunk: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let nested = map_indexed(chunks, workers, |c| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        (lo..hi).map(&f).collect::<Vec<_>>()
    });
    nested.into_iter().flatten().collect()
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
