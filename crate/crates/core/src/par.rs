//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! pool; without it, or through the `sequential` functions, on the calling
//! thread. Both keep input order in their results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map every item, results in input order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sequential::map(items, f)
    }
}

/// Map then fold with an associative `reduce`; `identity` must be its unit.
pub fn map_reduce<T, R, M, I, F>(items: &[T], identity: I, map: M, reduce: F) -> R
where
    T: Sync,
    R: Send,
    M: Fn(&T) -> R + Sync + Send,
    I: Fn() -> R + Sync + Send,
    F: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(map).reduce(identity, reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sequential::map_reduce(items, identity, map, reduce)
    }
}

/// Size the global pool. Returns false when the pool was already built or
/// the crate has no parallel support.
pub fn set_workers(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

pub mod sequential {
    pub fn map<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
        items.iter().map(f).collect()
    }

    pub fn map_reduce<T, R>(
        items: &[T],
        identity: impl Fn() -> R,
        map: impl Fn(&T) -> R,
        reduce: impl Fn(R, R) -> R,
    ) -> R {
        items.iter().map(map).fold(identity(), reduce)
    }
}
