//! Parallel evaluation of independent grid points.
//!
//! Every check in this crate is pure, so parameter grids map cleanly onto
//! a data-parallel loop. With the `parallel` feature (default) the work is
//! dispatched through rayon; without it, or when `parallel = false` is
//! requested explicitly, a plain sequential loop runs instead. Output
//! ordering is identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, optionally in parallel. Results keep input order.
pub fn map_grid<T, U, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.into_iter().map(f).collect()
}
