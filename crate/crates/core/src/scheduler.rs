//! User selection by two-sided swapping.
//!
//! A candidate scheduled set always holds exactly one user per subband. Each
//! candidate is scored by pairing it optimally with the subbands
//! ([`hungarian_assign`]) and splitting the task so all users finish
//! together ([`optimal_split`]). The search exchanges one scheduled user
//! with one idle user whenever that lowers the objective.

use thiserror::Error;

use crate::matching::{build_weight_matrix, hungarian_assign, MatchingError};
use crate::model::{self, ConstraintViolation, ProblemInstance, SolutionReport, UserId};
use crate::task_alloc::{optimal_split, AllocError, AlphaVector};

/// Minimum objective decrease for a swap to count as an improvement.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// Default cap on full passes over the swap neighbourhood.
pub const MAX_PASSES: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Allocation(#[from] AllocError),
    #[error(transparent)]
    Constraint(#[from] ConstraintViolation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PassMode {
    /// Rescan the whole neighbourhood until a pass accepts nothing.
    #[default]
    FixedPoint,
    /// Visit every pair of the starting neighbourhood once, then stop.
    SinglePass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapConfig {
    pub mode: PassMode,
    pub max_passes: usize,
    pub improvement_eps: f64,
    /// Weight used to rank candidate sets; `None` uses the instance weight.
    pub search_weight: Option<f64>,
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            mode: PassMode::FixedPoint,
            max_passes: MAX_PASSES,
            improvement_eps: IMPROVEMENT_EPS,
            search_weight: None,
        }
    }
}

/// Best pairing and split for `scheduled`, scored under the instance weight.
pub fn evaluate_set(
    scheduled: &[UserId],
    instance: &ProblemInstance,
) -> Result<SolutionReport, ScheduleError> {
    evaluate_set_with_weight(scheduled, instance, instance.weight())
}

/// As [`evaluate_set`], scored under `weight`. The pairing does not depend
/// on the weight.
pub fn evaluate_set_with_weight(
    scheduled: &[UserId],
    instance: &ProblemInstance,
    weight: f64,
) -> Result<SolutionReport, ScheduleError> {
    let weights = build_weight_matrix(scheduled, instance)?;
    let assignment = hungarian_assign(&weights);
    let alphas = AlphaVector::from_assignment(&assignment, instance)?;
    let allocation = optimal_split(&alphas, instance.task_bits())?;
    let mut report = model::objective_with_weight(&assignment, &allocation, instance, weight)?;
    report.diagnostics.evaluations = 1;
    report.diagnostics.matching_calls = 1;
    Ok(report)
}

/// Greedy pairing: subbands in ascending order each take the not yet chosen
/// user with the largest gain on them, lower id first on ties.
pub fn greedy_gain_pairs(instance: &ProblemInstance) -> Vec<(UserId, usize)> {
    let mut taken = vec![false; instance.n_users()];
    let mut pairs = Vec::with_capacity(instance.n_subbands());
    for subband in 0..instance.n_subbands() {
        let mut best: Option<(UserId, f64)> = None;
        for user in instance.users().iter().filter(|u| !taken[u.id]) {
            let g = user.gains[subband];
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((user.id, g));
            }
        }
        // K > N guarantees a free user remains.
        let (k, _) = best.expect("more users than subbands");
        taken[k] = true;
        pairs.push((k, subband));
    }
    pairs
}

/// Warm start for the swap search: the users picked by
/// [`greedy_gain_pairs`], ascending.
pub fn initial_set(instance: &ProblemInstance) -> Vec<UserId> {
    let mut set: Vec<_> = greedy_gain_pairs(instance)
        .into_iter()
        .map(|p| p.0)
        .collect();
    set.sort_unstable();
    set
}

fn replace(set: &[UserId], out: UserId, inn: UserId) -> Vec<UserId> {
    let mut next: Vec<_> = set
        .iter()
        .map(|&u| if u == out { inn } else { u })
        .collect();
    next.sort_unstable();
    next
}

fn complement(set: &[UserId], n_users: usize) -> Vec<UserId> {
    (0..n_users)
        .filter(|k| set.binary_search(k).is_err())
        .collect()
}

/// Swap search under the default configuration.
pub fn swap_optimize(instance: &ProblemInstance) -> Result<SolutionReport, ScheduleError> {
    swap_optimize_with(instance, &SwapConfig::default())
}

/// Swap search from [`initial_set`].
///
/// Pairs `(s, s')` are visited in ascending id order and an accepted swap
/// takes effect at once; pairs whose `s` already left or whose `s'` already
/// joined the set are skipped for the rest of the pass. The returned report
/// is scored under the search weight.
pub fn swap_optimize_with(
    instance: &ProblemInstance,
    config: &SwapConfig,
) -> Result<SolutionReport, ScheduleError> {
    let weight = config.search_weight.unwrap_or(instance.weight());
    let mut set = initial_set(instance);
    let mut best = evaluate_set_with_weight(&set, instance, weight)?;
    let mut evaluations = 1;
    let mut accepted = 0;
    let mut passes = 0;
    let mut fixed_point = false;

    while passes < config.max_passes {
        passes += 1;
        let inside = set.clone();
        let outside = complement(&set, instance.n_users());
        let mut accepted_in_pass = 0;
        for &s in &inside {
            for &s_new in &outside {
                if set.binary_search(&s).is_err() || set.binary_search(&s_new).is_ok() {
                    continue;
                }
                let candidate = replace(&set, s, s_new);
                let report = evaluate_set_with_weight(&candidate, instance, weight)?;
                evaluations += 1;
                if report.objective < best.objective - config.improvement_eps {
                    set = candidate;
                    best = report;
                    accepted_in_pass += 1;
                }
            }
        }
        accepted += accepted_in_pass;
        if accepted_in_pass == 0 {
            fixed_point = true;
            break;
        }
        if config.mode == PassMode::SinglePass {
            break;
        }
    }

    best.diagnostics = model::Diagnostics {
        passes,
        evaluations,
        matching_calls: evaluations,
        accepted_swaps: accepted,
        fixed_point,
    };
    Ok(best)
}

/// First single swap (in ascending `(s, s')` order) that lowers the
/// objective of `scheduled` by more than `eps`, with the improved objective.
pub fn find_improving_swap(
    scheduled: &[UserId],
    instance: &ProblemInstance,
    weight: f64,
    eps: f64,
) -> Result<Option<(UserId, UserId, f64)>, ScheduleError> {
    let mut set = scheduled.to_vec();
    set.sort_unstable();
    let base = evaluate_set_with_weight(&set, instance, weight)?.objective;
    for &s in &set {
        for s_new in complement(&set, instance.n_users()) {
            let candidate = replace(&set, s, s_new);
            let value = evaluate_set_with_weight(&candidate, instance, weight)?.objective;
            if value < base - eps {
                return Ok(Some((s, s_new, value)));
            }
        }
    }
    Ok(None)
}
