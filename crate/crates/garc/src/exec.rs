//! Data-parallel map helpers used by the hot loops.
//!
//! With the `parallel` feature (on by default) [`map`] distributes work via
//! rayon; without it the same call runs sequentially. [`map_seq`] is always
//! sequential and is kept public as the baseline the benchmark suite
//! compares against.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every item, in parallel when the `parallel` feature is on.
///
/// The output order matches the input order regardless of scheduling.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Sequential counterpart of [`map`], available under either feature set.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let doubled = map(&items, |x| x * 2);
        let doubled_seq = map_seq(&items, |x| x * 2);
        assert_eq!(doubled, doubled_seq);
        assert_eq!(doubled[999], 1998);
    }
}
