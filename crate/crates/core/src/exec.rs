//! Enumeration limits and the data-parallel map used by every exhaustive
//! enumeration in the crate.
//!
//! With the `parallel` feature enabled (the default) index ranges are split
//! across the rayon pool; otherwise, or when [`Limits::parallel`] is false,
//! the same closures run sequentially. Results are always returned in index
//! order so callers never observe scheduling.

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ENUM: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Upper bound on the number of candidates any single enumeration may visit.
    pub max_enum: u64,
    /// Request parallel execution. Ignored without the `parallel` feature.
    pub parallel: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_enum: DEFAULT_MAX_ENUM,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl Limits {
    pub fn sequential() -> Self {
        Limits {
            parallel: false,
            ..Limits::default()
        }
    }

    pub fn with_max_enum(mut self, max_enum: u64) -> Self {
        self.max_enum = max_enum;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// Fails with `ExplosionGuard` when `size` exceeds the cap.
    pub fn guard(&self, size: u128) -> Result<()> {
        if size > self.max_enum as u128 {
            Err(Error::ExplosionGuard {
                size,
                cap: self.max_enum,
            })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub fn checked_pow(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Maps `f` over `0..n`, preserving index order.
pub fn map_indices<T, F>(limits: &Limits, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if limits.parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = limits;
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indices`]; the first error in index order wins.
pub fn try_map_indices<T, F>(limits: &Limits, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indices(limits, n, f).into_iter().collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<'a, S, T, F>(limits: &Limits, items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if limits.parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = limits;
    items.iter().map(f).collect()
}
