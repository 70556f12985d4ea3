//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run sequentially. Results are always returned
//! in input order so callers observe identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
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
        items.iter().map(f).collect()
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
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

/// Returns the element minimizing `key` under a total order. Ties on the key
/// are impossible to observe because callers fold a unique id into it, so the
/// result does not depend on how the reduction is split.
pub fn min_by_key<T, K, F>(items: &[T], key: F) -> Option<(usize, K)>
where
    T: Sync,
    K: Ord + Send,
    F: Fn(usize, &T) -> Option<K> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .enumerate()
            .filter_map(|(i, t)| key(i, t).map(|k| (i, k)))
            .min_by(|a, b| a.1.cmp(&b.1))
    }
    #[cfg(not(feature = "parallel"))]
    {
        items
            .iter()
            .enumerate()
            .filter_map(|(i, t)| key(i, t).map(|k| (i, k)))
            .min_by(|a, b| a.1.cmp(&b.1))
    }
}
