//! Deterministic sample-loop execution.
//!
//! `map_indexed` evaluates `f(0..n)` either on the rayon pool (`parallel`
//! feature, default) or sequentially; the output order is by index in both
//! cases. Reductions go through [`pairwise_sum`], a fixed-shape tree, so
//! sums do not depend on thread count or chunking.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluate `f` at every index, preserving index order in the output.
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
        map_indexed_seq(n, f)
    }
}

/// Sequential variant, always available (benchmark baseline).
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Run `job` on a dedicated pool with `threads` workers. With the
/// `parallel` feature disabled this just calls `job`.
pub fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(job)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        job()
    }
}

/// Sum by pairwise tree reduction. The reduction shape depends only on the
/// slice length, so the result is bit-stable for a given input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Mean via pairwise summation.
pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}
