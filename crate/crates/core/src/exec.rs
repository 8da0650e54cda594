//! Node-loop execution strategy.
//!
//! All quadrature routines reduce to "evaluate an independent closure
//! at every grid node". With the `parallel` feature those evaluations
//! run on the rayon pool; without it they run in a plain loop. Either
//! way each node's *inner* summation order is fixed, so the two builds
//! (and any rayon thread count) produce bitwise-identical values.

use crate::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `job(i)` for `i = 1..=n` and collects the results in index
/// order, failing fast on the first error.
#[cfg(feature = "parallel")]
pub fn map_node_indices<F>(n: usize, job: F) -> Result<Vec<f64>, Error>
where
    F: Fn(usize) -> Result<f64, Error> + Sync + Send,
{
    (1..=n).into_par_iter().map(job).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn map_node_indices<F>(n: usize, job: F) -> Result<Vec<f64>, Error>
where
    F: Fn(usize) -> Result<f64, Error> + Sync,
{
    (1..=n).map(job).collect()
}

/// Always-sequential variant, kept available in every build so callers
/// (and benchmarks) can compare the two execution paths directly.
pub fn map_node_indices_seq<F>(n: usize, job: F) -> Result<Vec<f64>, Error>
where
    F: Fn(usize) -> Result<f64, Error> + Sync,
{
    (1..=n).map(job).collect()
}
