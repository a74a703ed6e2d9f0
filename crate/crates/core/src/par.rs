//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the maps below run on rayon's pool; without it
//! they are plain iterator loops. Outputs are ordered by index either way, so
//! results never depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Amplitude count above which gate kernels split work across threads.
pub const PAR_AMPLITUDE_THRESHOLD: usize = 1 << 14;

/// `f(i)` for `i in 0..n`, collected in index order.
pub fn map_indexed<R, F>(n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
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

/// Applies `f(chunk_index, chunk)` to consecutive `size`-element chunks.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], size: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() >= PAR_AMPLITUDE_THRESHOLD {
            data.par_chunks_mut(size)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    data.chunks_mut(size).enumerate().for_each(|(i, c)| f(i, c));
}

/// Applies `f(index, item)` to every element.
pub fn for_each_indexed_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() >= PAR_AMPLITUDE_THRESHOLD {
            data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
    }
    data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}
