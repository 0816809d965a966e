//! Data-parallel execution helpers.
//!
//! Trial runners and subset enumerations are embarrassingly parallel:
//! every unit of work derives its own sub-seed, so outputs are identical
//! regardless of scheduling. With the default `parallel` feature the
//! indexed maps fan out over rayon; without it they run sequentially.
//! The `*_serial` variants are always available so benchmarks can compare
//! both paths in one binary.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential reference path; used by benchmarks and tiny workloads.
pub fn map_indexed_serial<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Map `f` over disjoint index ranges of `0..n` (chunked), concatenating
/// per-chunk result vectors in range order. Used where per-item results
/// are sparse (e.g. dependent-subset enumeration).
pub fn flat_map_ranges<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> Vec<T> + Sync + Send,
{
    let chunk = chunk.max(1);
    let ranges: Vec<_> = (0..n)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(n))
        .collect();
    #[cfg(feature = "parallel")]
    {
        ranges.into_par_iter().flat_map_iter(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges.into_iter().flat_map(f).collect()
    }
}

/// Sequential counterpart of [`flat_map_ranges`].
pub fn flat_map_ranges_serial<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    F: Fn(std::ops::Range<usize>) -> Vec<T>,
{
    let chunk = chunk.max(1);
    (0..n)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(n))
        .flat_map(f)
        .collect()
}

/// Configure the global worker count. Returns false if the pool was
/// already initialized (harmless; first caller wins). No-op without the
/// `parallel` feature.
pub fn configure_workers(workers: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        false
    }
}
