//! Execution helpers: data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`map`] fans out over rayon's global
//! pool; without it, it is an alias for [`map_seq`]. Result order matches
//! input order in both cases, so downstream aggregation is deterministic.

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map_seq(n, f)
}

/// Sequential reference path, always available (used by benches to compare
/// against the parallel path).
pub fn map_seq<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let a = map(100, |i| i * i);
        let b = map_seq(100, |i| i * i);
        assert_eq!(a, b);
    }
}
