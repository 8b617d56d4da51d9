//! Data-parallel map helpers with a sequential fallback.
//!
//! All heavy inner loops (ensembles, particles, Monte Carlo draws) go through
//! these order-preserving maps. Reductions happen after collection, in index
//! order, so the result is the same whether the `parallel` feature is on or
//! off and whatever the rayon pool size is. `RADARKIT_THREADS` caps the
//! worker count for binaries that call [`install_thread_cap`].

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smallest batch a rayon task will take. Items here are often sub-microsecond
/// (one particle push, one Monte Carlo draw), so per-item task dispatch would
/// cost more than the work itself.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 64;

/// Map `f` over `0..n`, preserving index order.
pub fn map_indexed<O, F>(n: usize, f: F) -> Vec<O>
where
    O: Send,
    F: Fn(usize) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_indexed`]; the first error wins.
pub fn try_map_indexed<O, E, F>(n: usize, f: F) -> Result<Vec<O>, E>
where
    O: Send,
    E: Send,
    F: Fn(usize) -> Result<O, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Worker cap requested through the `RADARKIT_THREADS` environment variable.
pub fn thread_cap() -> Option<usize> {
    std::env::var("RADARKIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Configure the global rayon pool from `RADARKIT_THREADS`, if set. Results
/// never depend on the pool size; this only bounds resource usage. Calling it
/// twice is harmless (the second attempt is ignored by rayon).
#[cfg(feature = "parallel")]
pub fn install_thread_cap() {
    if let Some(n) = thread_cap() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn install_thread_cap() {}
