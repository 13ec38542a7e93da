//! Sequential / data-parallel execution switch.
//!
//! Batch work (quadrature node evaluation in nested integrals, sweep rows,
//! parameter grids) goes through [`Execution::map`]. With the `parallel`
//! feature the `Parallel` variant runs on the rayon pool; without it both
//! variants run sequentially. Output order always matches input order, so
//! results do not depend on the chosen mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this mode will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Execution::Parallel {
                return items.par_iter().map(f).collect();
            }
        }
        items.iter().map(f).collect()
    }
}
