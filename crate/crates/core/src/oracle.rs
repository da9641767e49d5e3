//! Brute-force reference solvers for desk-scale certification.
//!
//! Nothing here calls the matching or scheduling code: subsets and pairings
//! are enumerated outright and each candidate is scored from the rate and
//! latency formulas in [`crate::model`].

use thiserror::Error;

use crate::matching::WeightMatrix;
use crate::model::{
    self, Assignment, ConstraintViolation, ProblemInstance, SolutionReport, UserId,
};
use crate::numeric;
use crate::task_alloc::{optimal_split, AllocError, AlphaVector};

/// Largest number of (subset, pairing) candidates [`exhaustive_joint`] will
/// enumerate.
pub const JOINT_LIMIT: u128 = 1_000_000;
/// Largest matrix [`exhaustive_matching`] will scan.
pub const MATCHING_LIMIT: usize = 8;
/// Largest scheduled set [`grid_split_check`] will grid.
pub const GRID_DIM_LIMIT: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("exhaustive search needs {count} evaluations, above the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error("matrix of size {got} exceeds the permutation-scan limit of {limit}")]
    MatrixTooLarge { got: usize, limit: usize },
    #[error("grid check supports at most {limit} users, got {got}")]
    Dimension { got: usize, limit: usize },
    #[error("grid needs at least two points per axis, got {0}")]
    GridPoints(usize),
    #[error(transparent)]
    Allocation(#[from] AllocError),
    #[error(transparent)]
    Constraint(#[from] ConstraintViolation),
}

/// `C(k, n) · n!`, or `None` on overflow.
pub fn joint_candidates(k: usize, n: usize) -> Option<u128> {
    if n > k {
        return Some(0);
    }
    // C(k, n) · n! = k! / (k − n)!
    ((k - n + 1)..=k).try_fold(1u128, |acc, x| acc.checked_mul(x as u128))
}

/// Advances `perm` to the next permutation in lexicographic order; returns
/// false after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm
        .iter()
        .rposition(|&x| x > perm[i])
        .expect("pivot has a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Advances the sorted index set `combo` over `0..k` to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], k: usize) -> bool {
    let n = combo.len();
    let Some(i) = (0..n).rev().find(|&i| combo[i] < k - n + i) else {
        return false;
    };
    combo[i] += 1;
    for j in i + 1..n {
        combo[j] = combo[j - 1] + 1;
    }
    true
}

/// Global optimum of the joint problem over every `N`-user subset and every
/// subband pairing of it, each with the equal-finish split. Ties go to the
/// first candidate in (subset, pairing) lexicographic order.
pub fn exhaustive_joint(instance: &ProblemInstance) -> Result<SolutionReport, OracleError> {
    let (k, n) = (instance.n_users(), instance.n_subbands());
    let count = joint_candidates(k, n).unwrap_or(u128::MAX);
    if count > JOINT_LIMIT {
        return Err(OracleError::TooLarge {
            count,
            limit: JOINT_LIMIT,
        });
    }

    let mut best: Option<SolutionReport> = None;
    let mut evaluations = 0;
    let mut subset: Vec<UserId> = (0..n).collect();
    loop {
        let mut order = subset.clone();
        loop {
            let assignment = Assignment::from_pairs(order.iter().copied().zip(0..n))?;
            let alphas = AlphaVector::new(order.iter().enumerate().map(|(band, &user)| {
                let u = instance.user(user);
                let rate = model::transmission_rate(u, band, instance);
                (user, 1.0 / u.sensing_rate + 1.0 / rate)
            }))?;
            let allocation = optimal_split(&alphas, instance.task_bits())?;
            let report = model::objective(&assignment, &allocation, instance)?;
            evaluations += 1;
            if best.as_ref().is_none_or(|b| report.objective < b.objective) {
                best = Some(report);
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
        if !next_combination(&mut subset, k) {
            break;
        }
    }
    let mut best = best.expect("K > N ≥ 1 yields at least one candidate");
    best.diagnostics.evaluations = evaluations;
    Ok(best)
}

/// Maximum-weight perfect matching by scanning all `N!` permutations in
/// lexicographic order; the first maximum wins ties.
pub fn exhaustive_matching(weights: &WeightMatrix) -> Result<(Assignment, f64), OracleError> {
    let n = weights.n();
    if n > MATCHING_LIMIT {
        return Err(OracleError::MatrixTooLarge {
            got: n,
            limit: MATCHING_LIMIT,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let total = numeric::sum(
            perm.iter()
                .enumerate()
                .map(|(row, &col)| weights.get(row, col)),
        );
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((perm.clone(), total));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (cols, total) = best.expect("at least the identity permutation");
    Ok((weights.assignment_from_columns(&cols), total))
}

/// Smallest `max_k α_k d_k` over a uniform simplex grid of splits with
/// `Σ d_k = d̄`, `grid_points` per axis.
pub fn grid_split_check(
    alphas: &AlphaVector,
    task_bits: f64,
    grid_points: usize,
) -> Result<f64, OracleError> {
    let a: Vec<f64> = alphas.iter().map(|(_, a)| a).collect();
    if a.len() > GRID_DIM_LIMIT {
        return Err(OracleError::Dimension {
            got: a.len(),
            limit: GRID_DIM_LIMIT,
        });
    }
    if grid_points < 2 {
        return Err(OracleError::GridPoints(grid_points));
    }
    let steps = grid_points - 1;
    let at = |i: usize| task_bits * i as f64 / steps as f64;
    let value = match a.len() {
        1 => a[0] * task_bits,
        2 => (0..=steps)
            .map(|i| (a[0] * at(i)).max(a[1] * at(steps - i)))
            .fold(f64::INFINITY, f64::min),
        _ => {
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let worst = (a[0] * at(i))
                        .max(a[1] * at(j))
                        .max(a[2] * at(steps - i - j));
                    best = best.min(worst);
                }
            }
            best
        }
    };
    Ok(value)
}

/// How far the grid minimum may sit above the true optimum: one grid step
/// times the largest per-bit cost.
pub fn grid_lipschitz_bound(alphas: &AlphaVector, task_bits: f64, grid_points: usize) -> f64 {
    let max_alpha = alphas.iter().map(|(_, a)| a).fold(0.0, f64::max);
    max_alpha * task_bits / (grid_points.saturating_sub(1).max(1)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{params, user};

    fn alphas(values: &[f64]) -> AlphaVector {
        AlphaVector::new(values.iter().copied().enumerate()).unwrap()
    }

    #[test]
    fn permutation_order() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(
            seen,
            [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0]
            ]
        );
    }

    #[test]
    fn combination_order() {
        let mut c = vec![0, 1];
        let mut seen = vec![c.clone()];
        while next_combination(&mut c, 4) {
            seen.push(c.clone());
        }
        assert_eq!(seen, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]);
    }

    #[test]
    fn candidate_count() {
        assert_eq!(joint_candidates(4, 2), Some(12));
        assert_eq!(joint_candidates(8, 4), Some(1680));
        assert_eq!(joint_candidates(20, 10), Some(670_442_572_800));
    }

    #[test]
    fn matching_scan() {
        let w = WeightMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let (a, total) = exhaustive_matching(&w).unwrap();
        assert_eq!(total, 3.0);
        assert_eq!(a.pairs(), &[(0, 0), (1, 1)]);
        let big = WeightMatrix::from_rows(&vec![vec![1.0; 9]; 9]).unwrap();
        assert!(matches!(
            exhaustive_matching(&big),
            Err(OracleError::MatrixTooLarge { got: 9, .. })
        ));
    }

    #[test]
    fn grid_examples() {
        let a = alphas(&[1.0, 3.0]);
        let g = grid_split_check(&a, 4.0, 4001).unwrap();
        assert!((g - 3.0).abs() <= 1e-3, "{g}");
        assert_eq!(
            grid_split_check(&alphas(&[1.0, 1.0]), 10.0, 11).unwrap(),
            5.0
        );
        let a = alphas(&[2.0, 2.0, 2.0]);
        let g = grid_split_check(&a, 6.0, 31).unwrap();
        assert!(g >= 4.0 && g - 4.0 <= grid_lipschitz_bound(&a, 6.0, 31));
        assert!(matches!(
            grid_split_check(&alphas(&[1.0; 4]), 1.0, 10),
            Err(OracleError::Dimension { got: 4, .. })
        ));
    }

    #[test]
    fn joint_guard() {
        let users = (0..21).map(|k| user(k, 1e5, 0.1, 0, &[1e-9; 10])).collect();
        let inst = ProblemInstance::new(users, params(10, 3, 1e4, 0.5)).unwrap();
        assert!(matches!(
            exhaustive_joint(&inst),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn coverage_only_picks_widest_subset() {
        let inst = ProblemInstance::new(
            vec![
                user(0, 1e6, 0.2, 0, &[1e-8, 1e-8]),
                user(1, 1e6, 0.2, 0, &[1e-8, 1e-8]),
                user(2, 1e5, 0.1, 1, &[1e-11, 1e-11]),
                user(3, 1e5, 0.1, 1, &[1e-11, 1e-11]),
            ],
            params(2, 2, 5e3, 0.0),
        )
        .unwrap();
        let r = exhaustive_joint(&inst).unwrap();
        assert_eq!(r.coverage, 2);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.diagnostics.evaluations, 12);
    }
}
