//! Candidate evaluation on a worker pool. Results come back in candidate
//! order whatever the pool size, so everything downstream is deterministic.

use qsynth_core::model::PartialProgram;
use qsynth_core::synthesis::{evaluate_candidate, finish, Candidate, Outcome, Prepared};
use rayon::prelude::*;

/// Evaluates every candidate of `prep` on `threads` workers (0 picks the
/// number of available cores).
pub fn evaluate_all(prep: &Prepared, threads: usize) -> anyhow::Result<Vec<Candidate>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    Ok(pool.install(|| {
        (0..prep.candidates.len())
            .into_par_iter()
            .map(|i| evaluate_candidate(prep, i))
            .collect()
    }))
}

pub fn resolve_parallel(
    prep: &Prepared,
    source: Option<&PartialProgram>,
    threads: usize,
) -> anyhow::Result<Outcome> {
    Ok(finish(prep, source, evaluate_all(prep, threads)?))
}
