//! Subband–user pairing for a fixed scheduled set.
//!
//! Rows of the [`WeightMatrix`] are subbands, columns are scheduled users in
//! ascending id order, and entry `(n, s)` is `1/α` of user `s` on subband
//! `n`. The pairing that maximises the matched total minimises the
//! completion time of the equal-finish split, `d̄ / Σ 1/α`.
//!
//! Two solvers are provided:
//! * [`hungarian_assign`], the O(N³) shortest-augmenting-path form with
//!   row/column potentials, used by the scheduler;
//! * [`reduction_assign`], the classical matrix-reduction form (row and
//!   column reduction, minimum line cover, cover adjustment, matching on
//!   zeros), kept as a reference.
//!
//! Both minimise the negated weights and resolve ties among optimal pairings
//! the same way: the lexicographically smallest column sequence when read in
//! subband order.

use thiserror::Error;

use crate::model::{self, Assignment, ProblemInstance, UserId};
use crate::numeric;

/// Reduced costs within `ZERO_EPS · max(1, max |weight|)` of zero count as
/// zero.
pub const ZERO_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchingError {
    #[error(
        "scheduled set has {got} users, but the pairing needs exactly one per subband ({expected})"
    )]
    WrongSetSize { got: usize, expected: usize },
    #[error("user {0} appears twice in the scheduled set")]
    DuplicateUser(UserId),
    #[error("user {0} is not part of the instance")]
    UnknownUser(UserId),
    #[error("weight matrix must be square with {expected} entries, got {got}")]
    NotSquare { got: usize, expected: usize },
    #[error("weight ({row}, {col}) must be positive and finite, got {value}")]
    InvalidWeight { row: usize, col: usize, value: f64 },
    #[error("assignment is not a perfect matching of the weight matrix")]
    NotPerfect,
}

/// Square matrix of pairing weights; rows are subbands, columns users.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    users: Vec<UserId>,
    data: Vec<f64>,
}

impl WeightMatrix {
    /// `data` is row-major with one row per subband and one column per entry
    /// of `users`.
    pub fn new(users: Vec<UserId>, data: Vec<f64>) -> Result<Self, MatchingError> {
        let n = users.len();
        if data.len() != n * n {
            return Err(MatchingError::NotSquare {
                got: data.len(),
                expected: n * n,
            });
        }
        let mut sorted = users.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(MatchingError::DuplicateUser(w[0]));
        }
        for (idx, &value) in data.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(MatchingError::InvalidWeight {
                    row: idx / n,
                    col: idx % n,
                    value,
                });
            }
        }
        Ok(Self { n, users, data })
    }

    /// Matrix whose columns are users `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatchingError> {
        let n = rows.len();
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new((0..n).collect(), data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column labels.
    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn column_of(&self, user: UserId) -> Option<usize> {
        self.users.iter().position(|&u| u == user)
    }

    /// Same matrix with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, MatchingError> {
        Self::new(
            self.users.clone(),
            self.data.iter().map(|w| w * factor).collect(),
        )
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(1.0, |m, w| m.max(w.abs()))
    }

    /// Pairs row `n` with column `row_to_col[n]`.
    pub fn assignment_from_columns(&self, row_to_col: &[usize]) -> Assignment {
        Assignment::from_pairs(
            row_to_col
                .iter()
                .enumerate()
                .map(|(row, &col)| (self.users[col], row)),
        )
        .expect("a permutation is always a valid pairing")
    }

    /// Total weight of `assignment`, summed in subband order.
    pub fn total_weight(&self, assignment: &Assignment) -> Result<f64, MatchingError> {
        let cols = self.columns_of(assignment)?;
        Ok(numeric::sum(
            cols.iter()
                .enumerate()
                .map(|(row, &col)| self.get(row, col)),
        ))
    }

    fn columns_of(&self, assignment: &Assignment) -> Result<Vec<usize>, MatchingError> {
        if assignment.len() != self.n {
            return Err(MatchingError::NotPerfect);
        }
        // Pairs are sorted by subband, so a perfect matching lists 0..n.
        assignment
            .pairs()
            .iter()
            .enumerate()
            .map(|(row, &(user, subband))| {
                if subband != row {
                    return Err(MatchingError::NotPerfect);
                }
                self.column_of(user).ok_or(MatchingError::NotPerfect)
            })
            .collect()
    }
}

/// Weights `1/(1/v_s + 1/R_{s,n})` for the scheduled users.
pub fn build_weight_matrix(
    scheduled: &[UserId],
    instance: &ProblemInstance,
) -> Result<WeightMatrix, MatchingError> {
    let n = instance.n_subbands();
    if scheduled.len() != n {
        return Err(MatchingError::WrongSetSize {
            got: scheduled.len(),
            expected: n,
        });
    }
    let mut users = scheduled.to_vec();
    users.sort_unstable();
    if let Some(&u) = users.iter().find(|&&u| u >= instance.n_users()) {
        return Err(MatchingError::UnknownUser(u));
    }
    let mut data = Vec::with_capacity(n * n);
    for subband in 0..n {
        for &k in &users {
            data.push(1.0 / model::per_bit_cost(instance.user(k), subband, instance));
        }
    }
    WeightMatrix::new(users, data)
}

/// Maximum-weight perfect matching via shortest augmenting paths with
/// potentials.
pub fn hungarian_assign(weights: &WeightMatrix) -> Assignment {
    let n = weights.n;
    if n == 0 {
        return Assignment::empty();
    }
    let cost = |i: usize, j: usize| -weights.get(i, j);

    // 1-based potentials; index 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    let eps = ZERO_EPS * weights.max_abs();
    let mut tight = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            tight[i * n + j] = cost(i, j) - u[i + 1] - v[j + 1] <= eps;
        }
        tight[i * n + row_to_col[i]] = true;
    }
    lex_smallest_perfect(&tight, n, &mut row_to_col);
    weights.assignment_from_columns(&row_to_col)
}

/// Maximum-weight perfect matching by the classical reduce-and-cover
/// procedure on `U = −weights`.
pub fn reduction_assign(weights: &WeightMatrix) -> Assignment {
    let n = weights.n;
    if n == 0 {
        return Assignment::empty();
    }
    let eps = ZERO_EPS * weights.max_abs();
    let mut u: Vec<f64> = weights.data.iter().map(|w| -w).collect();

    for i in 0..n {
        let row = &mut u[i * n..(i + 1) * n];
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        row.iter_mut().for_each(|x| *x -= min);
    }
    for j in 0..n {
        let min = (0..n).map(|i| u[i * n + j]).fold(f64::INFINITY, f64::min);
        (0..n).for_each(|i| u[i * n + j] -= min);
    }

    let row_to_col = loop {
        let zeros: Vec<bool> = u.iter().map(|&x| x <= eps).collect();
        let row_to_col = max_matching(&zeros, n);
        let lines = row_to_col.iter().filter(|c| c.is_some()).count();
        if lines == n {
            break row_to_col;
        }
        let (row_cov, col_cov) = min_line_cover(&zeros, n, &row_to_col);
        let mut min = f64::INFINITY;
        for i in (0..n).filter(|&i| !row_cov[i]) {
            for j in (0..n).filter(|&j| !col_cov[j]) {
                min = min.min(u[i * n + j]);
            }
        }
        for i in 0..n {
            for j in 0..n {
                match (row_cov[i], col_cov[j]) {
                    (false, false) => u[i * n + j] -= min,
                    (true, true) => u[i * n + j] += min,
                    _ => {}
                }
            }
        }
    };

    let mut row_to_col: Vec<usize> = row_to_col.into_iter().map(Option::unwrap).collect();
    let zeros: Vec<bool> = u.iter().map(|&x| x <= eps).collect();
    lex_smallest_perfect(&zeros, n, &mut row_to_col);
    weights.assignment_from_columns(&row_to_col)
}

/// `d̄` divided by the matched weight total: the completion time of the
/// equal-finish split on this pairing.
pub fn matching_latency(
    assignment: &Assignment,
    weights: &WeightMatrix,
    task_bits: f64,
) -> Result<f64, MatchingError> {
    Ok(task_bits / weights.total_weight(assignment)?)
}

/// Maximum matching on the bipartite graph `adj` (row-major `n × n`) by
/// repeated augmenting paths.
fn max_matching(adj: &[bool], n: usize) -> Vec<Option<usize>> {
    fn augment(
        row: usize,
        adj: &[bool],
        n: usize,
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if !adj[row * n + col] || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match col_owner[col] {
                None => true,
                Some(other) => augment(other, adj, n, seen, col_owner),
            };
            if free {
                col_owner[col] = Some(row);
                return true;
            }
        }
        false
    }

    let mut col_owner = vec![None; n];
    for row in 0..n {
        let mut seen = vec![false; n];
        augment(row, adj, n, &mut seen, &mut col_owner);
    }
    let mut row_to_col = vec![None; n];
    for (col, owner) in col_owner.iter().enumerate() {
        if let Some(row) = *owner {
            row_to_col[row] = Some(col);
        }
    }
    row_to_col
}

/// Minimum set of lines covering every zero, from a maximum matching
/// (König): rows not reached from free rows by alternating paths, plus
/// columns that are reached.
fn min_line_cover(
    zeros: &[bool],
    n: usize,
    row_to_col: &[Option<usize>],
) -> (Vec<bool>, Vec<bool>) {
    let mut col_owner = vec![None; n];
    for (row, col) in row_to_col.iter().enumerate() {
        if let Some(c) = *col {
            col_owner[c] = Some(row);
        }
    }
    let mut row_seen = vec![false; n];
    let mut col_seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&r| row_to_col[r].is_none()).collect();
    stack.iter().for_each(|&r| row_seen[r] = true);
    while let Some(row) = stack.pop() {
        for col in 0..n {
            if zeros[row * n + col] && !col_seen[col] {
                col_seen[col] = true;
                if let Some(next) = col_owner[col] {
                    if !row_seen[next] {
                        row_seen[next] = true;
                        stack.push(next);
                    }
                }
            }
        }
    }
    let row_cov = row_seen.iter().map(|&s| !s).collect();
    (row_cov, col_seen)
}

/// Rewrites the perfect matching `row_to_col` of the graph `tight` into the
/// lexicographically smallest perfect matching of that graph.
///
/// Rows are fixed in order. For row `i`, each smaller tight column `c` is
/// tried by looking for an alternating path that frees `c` using only rows
/// after `i`.
fn lex_smallest_perfect(tight: &[bool], n: usize, row_to_col: &mut [usize]) {
    fn reroute(
        row: usize,
        ctx: &Reroute<'_>,
        seen: &mut [bool],
        row_to_col: &mut [usize],
        col_to_row: &mut [usize],
    ) -> bool {
        let n = ctx.n;
        for col in 0..n {
            if !ctx.tight[row * n + col] || seen[col] || col == ctx.taken {
                continue;
            }
            if col != ctx.target && col_to_row[col] <= ctx.fixed {
                continue;
            }
            seen[col] = true;
            if col == ctx.target || reroute(col_to_row[col], ctx, seen, row_to_col, col_to_row) {
                row_to_col[row] = col;
                col_to_row[col] = row;
                return true;
            }
        }
        false
    }

    struct Reroute<'a> {
        tight: &'a [bool],
        n: usize,
        /// Last row whose column is fixed.
        fixed: usize,
        /// Column being claimed by the fixed row.
        taken: usize,
        /// Column released by the fixed row.
        target: usize,
    }

    let mut col_to_row = vec![0usize; n];
    for (row, &col) in row_to_col.iter().enumerate() {
        col_to_row[col] = row;
    }
    for i in 0..n {
        let current = row_to_col[i];
        for c in 0..current {
            if !tight[i * n + c] || col_to_row[c] < i {
                continue;
            }
            let ctx = Reroute {
                tight,
                n,
                fixed: i,
                taken: c,
                target: current,
            };
            let mut seen = vec![false; n];
            let displaced = col_to_row[c];
            if reroute(displaced, &ctx, &mut seen, row_to_col, &mut col_to_row) {
                row_to_col[i] = c;
                col_to_row[c] = i;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{params, user};
    use proptest::prelude::*;

    fn columns(a: &Assignment, w: &WeightMatrix) -> Vec<usize> {
        a.pairs()
            .iter()
            .map(|&(u, _)| w.column_of(u).unwrap())
            .collect()
    }

    fn brute_best(w: &WeightMatrix) -> f64 {
        fn rec(w: &WeightMatrix, row: usize, used: &mut Vec<bool>, acc: Vec<f64>, best: &mut f64) {
            if row == w.n() {
                *best = best.max(crate::numeric::sum(acc));
                return;
            }
            for c in 0..w.n() {
                if !used[c] {
                    used[c] = true;
                    let mut next = acc.clone();
                    next.push(w.get(row, c));
                    rec(w, row + 1, used, next, best);
                    used[c] = false;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(w, 0, &mut vec![false; w.n()], Vec::new(), &mut best);
        best
    }

    #[test]
    fn two_by_two() {
        let w = WeightMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        for a in [hungarian_assign(&w), reduction_assign(&w)] {
            assert_eq!(a.pairs(), &[(0, 0), (1, 1)]);
            assert_eq!(w.total_weight(&a).unwrap(), 3.0);
        }
    }

    #[test]
    fn dominant_diagonal() {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 10.0 } else { 1.0 }).collect())
            .collect();
        let w = WeightMatrix::from_rows(&rows).unwrap();
        for a in [hungarian_assign(&w), reduction_assign(&w)] {
            assert_eq!(columns(&a, &w), [0, 1, 2]);
            assert_eq!(w.total_weight(&a).unwrap(), 30.0);
        }
    }

    #[test]
    fn all_equal_picks_identity() {
        for n in 1..7 {
            let w = WeightMatrix::from_rows(&vec![vec![4.0; n]; n]).unwrap();
            for a in [hungarian_assign(&w), reduction_assign(&w)] {
                assert_eq!(columns(&a, &w), (0..n).collect::<Vec<_>>());
                assert_eq!(w.total_weight(&a).unwrap(), 4.0 * n as f64);
            }
        }
    }

    #[test]
    fn partial_ties_resolve_lexicographically() {
        // Columns [1, 0, 2] and [2, 0, 1] both total 12; the smaller
        // sequence wins.
        let w = WeightMatrix::from_rows(&[
            vec![1.0, 5.0, 5.0],
            vec![5.0, 1.0, 1.0],
            vec![1.0, 2.0, 2.0],
        ])
        .unwrap();
        for a in [hungarian_assign(&w), reduction_assign(&w)] {
            assert_eq!(columns(&a, &w), [1, 0, 2]);
        }
    }

    #[test]
    fn columns_carry_user_ids() {
        let w = WeightMatrix::new(vec![3, 7], vec![1.0, 9.0, 9.0, 1.0]).unwrap();
        let a = hungarian_assign(&w);
        assert_eq!(a.pairs(), &[(7, 0), (3, 1)]);
        assert_eq!(matching_latency(&a, &w, 36.0).unwrap(), 2.0);
    }

    #[test]
    fn matching_latency_examples() {
        let w = WeightMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let a = hungarian_assign(&w);
        assert_eq!(matching_latency(&a, &w, 6.0).unwrap(), 2.0);
        let single = WeightMatrix::from_rows(&[vec![4.0]]).unwrap();
        let a = hungarian_assign(&single);
        assert_eq!(matching_latency(&a, &single, 10.0).unwrap(), 2.5);
        let partial = Assignment::from_pairs([(0, 0)]).unwrap();
        assert_eq!(
            matching_latency(&partial, &w, 1.0),
            Err(MatchingError::NotPerfect)
        );
    }

    #[test]
    fn weight_matrix_validation() {
        assert!(matches!(
            WeightMatrix::new(vec![0, 1], vec![1.0; 3]),
            Err(MatchingError::NotSquare { .. })
        ));
        assert!(matches!(
            WeightMatrix::new(vec![0, 0], vec![1.0; 4]),
            Err(MatchingError::DuplicateUser(0))
        ));
        assert!(matches!(
            WeightMatrix::new(vec![0, 1], vec![1.0, 0.0, 1.0, 1.0]),
            Err(MatchingError::InvalidWeight { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn weight_matrix_entries() {
        // v = 1e12 leaves the transmission time dominant; v equal to R halves it.
        let snr_for = |rate: f64| 2f64.powf(rate / 1e6) - 1.0;
        let n0 = crate::model::tests::N0;
        let g = |rate: f64| snr_for(rate) * n0 * 1e6 / 0.1;
        let inst = ProblemInstance::new(
            vec![
                user(0, 1e12, 0.1, 0, &[g(1e6), g(1e6)]),
                user(1, 1e6, 0.1, 0, &[g(1e6), g(2e6)]),
                user(2, 1e6, 0.1, 0, &[1e-9, 1e-9]),
            ],
            params(2, 1, 1e4, 0.5),
        )
        .unwrap();
        let w = build_weight_matrix(&[1, 0], &inst).unwrap();
        assert_eq!(w.users(), &[0, 1]);
        assert!((w.get(0, 0) - 1e6 * (1.0 - 1e-6)).abs() < 1e-3);
        assert!((w.get(0, 1) - 5e5).abs() < 1e-6);
        let w = build_weight_matrix(&[2, 0], &inst).unwrap();
        assert_eq!(w.get(0, 1), w.get(1, 1));
        assert_eq!(
            build_weight_matrix(&[0], &inst),
            Err(MatchingError::WrongSetSize {
                got: 1,
                expected: 2
            })
        );
    }

    #[test]
    fn large_instance_is_optimal_by_dual_certificate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 120;
        let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(1e5..1e6)).collect();
        let w = WeightMatrix::new((0..n).collect(), data).unwrap();
        let fast = hungarian_assign(&w);
        assert_eq!(fast.len(), n);
        let slow = reduction_assign(&w);
        let (a, b) = (
            w.total_weight(&fast).unwrap(),
            w.total_weight(&slow).unwrap(),
        );
        assert!(crate::numeric::rel_diff(a, b) < 1e-12, "{a} vs {b}");
    }

    fn square() -> impl Strategy<Value = WeightMatrix> {
        (1usize..6).prop_flat_map(|n| {
            prop::collection::vec(1e-3f64..1e3, n * n)
                .prop_map(move |d| WeightMatrix::new((0..n).collect(), d).unwrap())
        })
    }

    fn tied_square() -> impl Strategy<Value = WeightMatrix> {
        (1usize..6).prop_flat_map(|n| {
            prop::collection::vec(1u8..4, n * n).prop_map(move |d| {
                WeightMatrix::new((0..n).collect(), d.into_iter().map(f64::from).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn both_solvers_reach_brute_force(w in square()) {
            let best = brute_best(&w);
            let fast = w.total_weight(&hungarian_assign(&w)).unwrap();
            let slow = w.total_weight(&reduction_assign(&w)).unwrap();
            prop_assert!(crate::numeric::rel_diff(fast, best) < 1e-12);
            prop_assert!(crate::numeric::rel_diff(slow, best) < 1e-12);
        }

        #[test]
        fn solvers_agree_on_ties(w in tied_square()) {
            let fast = hungarian_assign(&w);
            let slow = reduction_assign(&w);
            prop_assert_eq!(&fast, &slow);
            prop_assert_eq!(w.total_weight(&fast).unwrap(), brute_best(&w));
        }

        #[test]
        fn scaling_keeps_pairing(w in square(), c in 1e-3f64..1e3) {
            let scaled = w.scaled(c).unwrap();
            prop_assert_eq!(hungarian_assign(&w), hungarian_assign(&scaled));
        }
    }
}
