//! Execution strategy for the data-parallel loops (candidate evaluation,
//! per-mask Walsh transforms, DDT rows).
//!
//! With the `parallel` feature (default) work items are spread over the rayon
//! pool; without it every strategy runs sequentially. Results never depend on
//! the strategy: every helper returns outputs in index order.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    /// Rayon's current pool. Falls back to sequential without the feature.
    Parallel,
    Sequential,
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
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub(crate) fn map<R, F>(self, range: Range<u64>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }

    /// Maximum of `f` over the range, 0 when empty.
    pub(crate) fn max<F>(self, range: Range<u64>, f: F) -> u64
    where
        F: Fn(u64) -> u64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().map(f).max().unwrap_or(0);
        }
        range.map(f).max().unwrap_or(0)
    }
}
