//! Deterministic chunked evaluation helpers.
//!
//! Sums and maps over element grids are split into fixed-size chunks that
//! do not depend on the thread count. Each chunk is reduced sequentially
//! (compensated summation), and the per-chunk results are combined in chunk
//! order. The parallel and sequential paths therefore produce bit-identical
//! results, which keeps brute-force oracles and CSV output reproducible.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions. Fixed: changing it changes
/// rounding, so it is part of the numerical contract.
const CHUNK: usize = 8192;

fn kahan_sum(range: std::ops::Range<usize>, term: &(impl Fn(usize) -> f64 + Sync)) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for i in range {
        let y = term(i) - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn chunk_ranges(n: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    (0..n.div_ceil(CHUNK)).map(move |k| (k * CHUNK)..((k + 1) * CHUNK).min(n))
}

/// Sum `term(i)` for `i in 0..n` with the deterministic chunked reduction.
pub fn sum_terms<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials = map_chunk_sums(n, &term);
    kahan_sum(0..partials.len(), &|k| partials[k])
}

#[cfg(feature = "parallel")]
fn map_chunk_sums(n: usize, term: &(impl Fn(usize) -> f64 + Sync)) -> Vec<f64> {
    chunk_ranges(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r| kahan_sum(r, term))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn map_chunk_sums(n: usize, term: &(impl Fn(usize) -> f64 + Sync)) -> Vec<f64> {
    chunk_ranges(n).map(|r| kahan_sum(r, term)).collect()
}

/// Sequential reference path for `sum_terms`, kept available in all builds
/// so benchmarks and determinism tests can compare against the parallel one.
pub fn sum_terms_sequential<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = chunk_ranges(n).map(|r| kahan_sum(r, &term)).collect();
    kahan_sum(0..partials.len(), &|k| partials[k])
}

/// Evaluate `f(i)` for `i in 0..n`, preserving index order.
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
