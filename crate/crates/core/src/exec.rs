//! Execution policy for the data-parallel kernels.
//!
//! With the `parallel` feature the default policy uses rayon; without it every
//! policy runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Sequential,
    Parallel,
}

impl Default for Policy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Policy::Parallel
        } else {
            Policy::Sequential
        }
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<T, F>(policy: Policy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match policy {
        #[cfg(feature = "parallel")]
        Policy::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(policy: Policy, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match policy {
        #[cfg(feature = "parallel")]
        Policy::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

pub fn for_each_mut<T, F>(policy: Policy, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    match policy {
        #[cfg(feature = "parallel")]
        Policy::Parallel if items.len() > 8 => items.par_iter_mut().for_each(f),
        _ => items.iter_mut().for_each(f),
    }
}

/// Sets the global rayon pool size; a no-op without the `parallel` feature.
pub fn set_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}
