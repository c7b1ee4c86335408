//! Data-parallel shot loops with a sequential fallback.
//!
//! Everything shot-shaped in this crate funnels through [`map_indexed`]: each
//! index gets its own derived random stream, results come back ordered by
//! index, and downstream reductions run sequentially over that order. This
//! keeps results bit-identical whether the `parallel` feature is on or off
//! and regardless of the rayon worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every index in `0..count`, returning results in index order.
pub fn map_indexed<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Fallible variant of [`map_indexed`]; the first error (by index) wins.
pub fn try_map_indexed<T, E, F>(count: u64, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> std::result::Result<T, E> + Sync + Send,
{
    let results = map_indexed(count, f);
    results.into_iter().collect()
}
