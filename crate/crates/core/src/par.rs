//! Data-parallel helpers with a sequential fallback.
//!
//! Work is always split into fixed-size chunks and partial results are
//! combined in chunk order, so outputs are bit-identical whether chunks run
//! on a rayon pool, on one thread, or with the `parallel` feature disabled.

use std::sync::atomic::{AtomicU8, Ordering};

/// Chunk length used by every kernel in the crate.
pub const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

static EXEC: AtomicU8 = AtomicU8::new(1);

/// Select the execution policy for subsequent kernel calls.
pub fn set_exec(exec: Exec) {
    EXEC.store(matches!(exec, Exec::Parallel) as u8, Ordering::Relaxed);
}

/// Current policy. Always `Sequential` without the `parallel` feature.
pub fn exec() -> Exec {
    if cfg!(feature = "parallel") && EXEC.load(Ordering::Relaxed) == 1 {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

/// Cap the worker count. One thread selects the sequential path; otherwise
/// the global rayon pool is sized once, and later calls keep the first size.
pub fn configure_threads(n: usize) {
    if n <= 1 {
        set_exec(Exec::Sequential);
        return;
    }
    set_exec(Exec::Parallel);
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Run `f(offset, chunk)` over consecutive chunks of `out`.
pub fn for_each_chunk<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec() == Exec::Parallel && out.len() > CHUNK {
        use rayon::prelude::*;
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| f(c * CHUNK, chunk));
        return;
    }
    for (c, chunk) in out.chunks_mut(CHUNK).enumerate() {
        f(c * CHUNK, chunk);
    }
}

/// Sum of `f(range)` over fixed chunks of `0..len`, reduced in chunk order.
pub fn chunked_sum<T, F>(len: usize, zero: T, f: F) -> T
where
    T: Send + Copy + std::ops::Add<Output = T>,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let n_chunks = len.div_ceil(CHUNK);
    let range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(len);
    let partials: Vec<T> = map_indexed(n_chunks, |c| f(range(c)));
    partials.into_iter().fold(zero, |a, b| a + b)
}

/// Like [`chunked_sum`] with an explicit combiner, for non-`Copy` partials.
pub fn chunked_fold<T, F, G>(len: usize, zero: T, f: F, combine: G) -> T
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    G: Fn(T, T) -> T,
{
    let n_chunks = len.div_ceil(CHUNK);
    let range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(len);
    map_indexed(n_chunks, |c| f(range(c)))
        .into_iter()
        .fold(zero, combine)
}

/// `(0..n).map(f).collect()`, evaluated in parallel when enabled.
/// Output order always follows the index.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec() == Exec::Parallel && n > 1 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}
