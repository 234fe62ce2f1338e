//! Execution policy for the data-parallel kernels.
//!
//! Every kernel that accepts an [`Exec`] produces bit-identical output in
//! both modes: parallel work is split over independent outputs and each
//! output is reduced in the same order as the sequential loop. Without the
//! `parallel` feature, `Exec::Parallel` runs sequentially.

use serde::{Deserialize, Serialize};

/// Minimum amount of scalar work before a kernel fans out to the thread pool.
pub const PAR_THRESHOLD: usize = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// True when work of the given size should be split across threads.
    #[inline]
    pub fn fans_out(self, work: usize) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel && work >= PAR_THRESHOLD
    }

    /// `out[i] = f(i)` for every index; `work_per_item` sizes the split.
    pub fn fill<F>(self, out: &mut [f64], work_per_item: usize, f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.fans_out(out.len().saturating_mul(work_per_item.max(1))) {
            use rayon::prelude::*;
            let min_len = (PAR_THRESHOLD / work_per_item.max(1)).max(1);
            out.par_iter_mut()
                .enumerate()
                .with_min_len(min_len)
                .for_each(|(i, o)| *o = f(i));
            return;
        }
        let _ = work_per_item;
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// Calls `f(offset, chunk)` on contiguous pieces of `out`; a single call
    /// covering everything when the work does not fan out.
    pub fn fill_chunks<F>(self, out: &mut [f64], work_per_item: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.fans_out(out.len().saturating_mul(work_per_item.max(1))) {
            use rayon::prelude::*;
            let chunk = (PAR_THRESHOLD / work_per_item.max(1)).max(64);
            out.par_chunks_mut(chunk).enumerate().for_each(|(c, piece)| f(c * chunk, piece));
            return;
        }
        let _ = work_per_item;
        f(0, out);
    }

    /// Maps `f` over `0..n`, preserving order. Used for independent runs and sweeps.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_matches_sequential() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let mut a = vec![0.0; 100_000];
        let mut b = vec![0.0; 100_000];
        Exec::Sequential.fill(&mut a, 1, f);
        Exec::Parallel.fill(&mut b, 1, f);
        assert_eq!(a, b);
    }

    #[test]
    fn chunks_cover_output() {
        let mut a = vec![0.0; 200_000];
        Exec::Parallel.fill_chunks(&mut a, 1, |off, piece| {
            for (k, v) in piece.iter_mut().enumerate() {
                *v = (off + k) as f64;
            }
        });
        assert!(a.iter().enumerate().all(|(i, &v)| v == i as f64));
    }

    #[test]
    fn map_preserves_order() {
        let v = Exec::Parallel.map(50, |i| i * i);
        assert_eq!(v, (0..50).map(|i| i * i).collect::<Vec<_>>());
    }
}
