//! Reference policies compared against the coverage-aware search.
//!
//! All of them are scored through [`model::objective`], so their reports are
//! directly comparable with [`swap_optimize`].

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{self, Allocation, Assignment, ProblemInstance, SolutionReport, UserId};
use crate::numeric;
use crate::scheduler::{greedy_gain_pairs, swap_optimize_with, ScheduleError, SwapConfig};

/// The swap search ranked on latency alone (`w = 1`), then re-scored under
/// the instance weight. Search counters are kept.
pub fn benchmark1(instance: &ProblemInstance) -> Result<SolutionReport, ScheduleError> {
    let config = SwapConfig {
        search_weight: Some(1.0),
        ..SwapConfig::default()
    };
    let searched = swap_optimize_with(instance, &config)?;
    let mut report = model::objective(&searched.assignment, &searched.allocation, instance)?;
    report.diagnostics = searched.diagnostics;
    Ok(report)
}

/// The `N` fastest sensors (ties by id), each on a uniformly random distinct
/// subband, with gain-proportional loads.
pub fn benchmark2<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    rng: &mut R,
) -> Result<SolutionReport, ScheduleError> {
    let n = instance.n_subbands();
    let mut by_rate: Vec<UserId> = (0..instance.n_users()).collect();
    by_rate.sort_by(|&a, &b| {
        instance
            .user(b)
            .sensing_rate
            .total_cmp(&instance.user(a).sensing_rate)
            .then(a.cmp(&b))
    });
    let mut scheduled = by_rate[..n].to_vec();
    scheduled.sort_unstable();

    let mut subbands: Vec<usize> = (0..n).collect();
    subbands.shuffle(rng);
    let assignment = Assignment::from_pairs(scheduled.into_iter().zip(subbands))?;
    score_fractional(assignment, instance)
}

/// Each subband in ascending order takes the free user with the highest gain
/// on it; loads are gain-proportional.
pub fn benchmark3(instance: &ProblemInstance) -> Result<SolutionReport, ScheduleError> {
    let assignment = Assignment::from_pairs(greedy_gain_pairs(instance))?;
    score_fractional(assignment, instance)
}

/// Loads `d̄ · g_{k,n} / Σ g` over the paired gains.
pub fn fractional_split(assignment: &Assignment, instance: &ProblemInstance) -> Allocation {
    let total = numeric::sum(
        assignment
            .pairs()
            .iter()
            .map(|&(k, n)| instance.user(k).gains[n]),
    );
    assignment
        .pairs()
        .iter()
        .map(|&(k, n)| {
            (
                k,
                instance.task_bits() * (instance.user(k).gains[n] / total),
            )
        })
        .collect()
}

fn score_fractional(
    assignment: Assignment,
    instance: &ProblemInstance,
) -> Result<SolutionReport, ScheduleError> {
    let allocation = fractional_split(&assignment, instance);
    Ok(model::objective(&assignment, &allocation, instance)?)
}
