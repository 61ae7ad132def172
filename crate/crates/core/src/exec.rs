//! Execution helpers: data-parallel map with a sequential fallback.
//!
//! The hot loops of the crate (spectral-matrix columns, randomized sweeps,
//! per-flow residuals) are all index-parallel. They go through
//! [`map_indexed`], which runs on rayon when the `parallel` feature is
//! enabled and degrades to a plain loop otherwise. Both variants are exported
//! so the bench suite can compare them directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map over `0..n`.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Rayon-backed map over `0..n`.
#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map over `0..n`, parallel when the feature allows it.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_par(n, f)
}

/// Map over `0..n`, parallel when the feature allows it.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}
