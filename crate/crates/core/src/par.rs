//! Data-parallel helpers with a sequential fallback.
//!
//! All helpers return results in index order, so reductions performed by the
//! caller over the returned vectors are bit-identical across thread counts.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Parallelism {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise sequential.
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Maps `f` over `0..len`, preserving order.
pub fn map_range<T, F>(exec: Parallelism, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<I, T, F>(exec: Parallelism, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Sums `f(i)` over `0..len` in fixed-size chunks. Chunk partial sums are
/// combined left to right, so the result does not depend on scheduling.
pub fn chunked_sum<F>(exec: Parallelism, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 4096;
    let chunks = len.div_ceil(CHUNK);
    let partial = map_range(exec, chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(len);
        (lo..hi).map(&f).sum::<f64>()
    });
    partial.into_iter().sum()
}

/// Configures the global rayon pool. A no-op without the `parallel` feature.
pub fn set_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential_bitwise() {
        let f = |i: usize| (i as f64 * 0.37).sin() / (1.0 + i as f64);
        let a = chunked_sum(Parallelism::Parallel, 100_003, f);
        let b = chunked_sum(Parallelism::Sequential, 100_003, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(Parallelism::Parallel, 1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
