//! Rayon helpers that keep results in input order.

use rayon::prelude::*;
use twosrc_core::montecarlo::{TrialOutcome, TrialSetup};
use twosrc_core::Result;

/// Applies `f` to every item concurrently; output order follows input order.
pub fn ordered_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// `(false alarms, misses)` over trials `0..trials`, run concurrently.
/// Counts equal a sequential run because each trial owns its RNG stream.
pub fn count_errors(setup: &TrialSetup, trials: u64) -> Result<(u64, u64)> {
    (0..trials)
        .into_par_iter()
        .map(|t| setup.run(t).map(|o: TrialOutcome| (o.false_alarm as u64, o.miss as u64)))
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
}
