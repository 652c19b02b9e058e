//! Data-parallel helpers. With the `parallel` feature these dispatch to rayon
//! when asked to; otherwise, or when `parallel` is false, they run the same
//! closures sequentially. Results never depend on which path ran.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether a `parallel: true` request will actually use worker threads.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `0..n` with one scratch value per worker.
pub(crate) fn map_indices<S, T, I, F>(n: usize, parallel: bool, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().with_min_len(256).map_init(init, f).collect();
    }
    let _ = parallel;
    let mut scratch = init();
    (0..n).map(|i| f(&mut scratch, i)).collect()
}

/// Maps `f` over `0..n` one item per task, for a few expensive items.
pub fn map_coarse<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().with_max_len(1).map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

pub(crate) fn for_each_mut<T, F>(items: &mut [T], parallel: bool, f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        items.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = parallel;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}
