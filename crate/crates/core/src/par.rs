//! Data-parallel helpers with a sequential fallback.

use serde::{Deserialize, Serialize};

/// How independent work items (restarts, grid slices, random cases) run.
///
/// `Parallel` falls back to sequential execution when the crate is built
/// without the `parallel` feature. Results are identical either way: items
/// are computed independently and collected in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
