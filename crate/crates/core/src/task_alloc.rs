//! Min-max split of the sensing task across a fixed, already-paired
//! scheduled set.
//!
//! With per-bit costs `α_k` fixed, the slowest user's time `max α_k d_k`
//! subject to `Σ d_k ≥ d̄` is minimised when every user finishes at the same
//! instant, which gives `d_k = d̄ · (1/α_k) / Σ_j (1/α_j)` and an optimal
//! value of `d̄ / Σ_j (1/α_j)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{self, Allocation, Assignment, ProblemInstance, UserId};
use crate::numeric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("cannot split a task across an empty scheduled set")]
    EmptySchedule,
    #[error("per-bit cost of user {user} must be positive and finite, got {value}")]
    InvalidCost { user: UserId, value: f64 },
    #[error("task size must be positive and finite, got {0}")]
    TaskBits(f64),
}

/// Per-bit completion cost `1/v_k + 1/R_k` (seconds per bit) of each
/// scheduled user.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    alphas: BTreeMap<UserId, f64>,
}

impl AlphaVector {
    pub fn new<I>(alphas: I) -> Result<Self, AllocError>
    where
        I: IntoIterator<Item = (UserId, f64)>,
    {
        let alphas: BTreeMap<_, _> = alphas.into_iter().collect();
        if alphas.is_empty() {
            return Err(AllocError::EmptySchedule);
        }
        for (&user, &value) in &alphas {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AllocError::InvalidCost { user, value });
            }
        }
        Ok(Self { alphas })
    }

    /// Costs of the users in `assignment`, each on its paired subband.
    pub fn from_assignment(
        assignment: &Assignment,
        instance: &ProblemInstance,
    ) -> Result<Self, AllocError> {
        Self::new(
            assignment
                .pairs()
                .iter()
                .map(|&(k, n)| (k, model::per_bit_cost(instance.user(k), n, instance))),
        )
    }

    pub fn get(&self, user: UserId) -> Option<f64> {
        self.alphas.get(&user).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, f64)> + '_ {
        self.alphas.iter().map(|(&k, &a)| (k, a))
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `Σ 1/α_k`, in users' id order.
    pub fn harmonic_total(&self) -> f64 {
        numeric::sum(self.alphas.values().map(|a| 1.0 / a))
    }
}

fn check_task(task_bits: f64) -> Result<(), AllocError> {
    if task_bits > 0.0 && task_bits.is_finite() {
        Ok(())
    } else {
        Err(AllocError::TaskBits(task_bits))
    }
}

/// Equal-finish-time split of `task_bits` over the users in `alphas`.
pub fn optimal_split(alphas: &AlphaVector, task_bits: f64) -> Result<Allocation, AllocError> {
    check_task(task_bits)?;
    let total = alphas.harmonic_total();
    // (1/α_k)/Σ ≤ 1 in floating point too, so loads never exceed d̄.
    Ok(alphas
        .iter()
        .map(|(k, a)| (k, task_bits * ((1.0 / a) / total)))
        .collect())
}

/// Optimal min-max completion time, `d̄ / Σ 1/α_k`.
pub fn minmax_value(alphas: &AlphaVector, task_bits: f64) -> Result<f64, AllocError> {
    check_task(task_bits)?;
    Ok(task_bits / alphas.harmonic_total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alphas(values: &[f64]) -> AlphaVector {
        AlphaVector::new(values.iter().copied().enumerate()).unwrap()
    }

    fn loads(a: &Allocation) -> Vec<f64> {
        a.loads().values().copied().collect()
    }

    #[test]
    fn symmetric_split() {
        assert_eq!(
            loads(&optimal_split(&alphas(&[1.0, 1.0]), 10.0).unwrap()),
            [5.0, 5.0]
        );
    }

    #[test]
    fn unequal_costs_split() {
        // max(d1, 3(4 − d1)) is minimised at d1 = 3.
        let a = alphas(&[1.0, 3.0]);
        let split = loads(&optimal_split(&a, 4.0).unwrap());
        assert!((split[0] - 3.0).abs() < 1e-12 && (split[1] - 1.0).abs() < 1e-12);
        assert!((minmax_value(&a, 4.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_user_takes_everything() {
        let a = alphas(&[2.0]);
        assert_eq!(loads(&optimal_split(&a, 7.0).unwrap()), [7.0]);
        assert_eq!(minmax_value(&a, 7.0).unwrap(), 14.0);
        let a = alphas(&[3.0]);
        assert_eq!(loads(&optimal_split(&a, 7.0).unwrap()), [7.0]);
    }

    #[test]
    fn three_equal_users() {
        let a = alphas(&[2.0, 2.0, 2.0]);
        assert_eq!(minmax_value(&a, 6.0).unwrap(), 4.0);
        assert_eq!(loads(&optimal_split(&a, 6.0).unwrap()), [2.0, 2.0, 2.0]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            AlphaVector::new(std::iter::empty()).unwrap_err(),
            AllocError::EmptySchedule
        );
        assert!(matches!(
            AlphaVector::new([(0, 0.0)]),
            Err(AllocError::InvalidCost { user: 0, .. })
        ));
        assert!(matches!(
            AlphaVector::new([(3, f64::INFINITY)]),
            Err(AllocError::InvalidCost { user: 3, .. })
        ));
        assert!(matches!(
            optimal_split(&alphas(&[1.0]), 0.0),
            Err(AllocError::TaskBits(_))
        ));
    }

    fn alpha_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-8f64..1e-3, 1..12)
    }

    proptest! {
        #[test]
        fn split_equalizes_and_covers(a in alpha_vec(), task in 1e2f64..1e5) {
            let av = alphas(&a);
            let split = optimal_split(&av, task).unwrap();
            let value = minmax_value(&av, task).unwrap();
            prop_assert!(crate::numeric::rel_diff(split.total(), task) <= 1e-12);
            for (k, alpha) in av.iter() {
                let d = split.load(k);
                prop_assert!(d > 0.0 && d <= task);
                prop_assert!(crate::numeric::rel_diff(alpha * d, value) <= 1e-9);
            }
        }

        #[test]
        fn scaling_task_scales_loads(a in alpha_vec(), task in 1e2f64..1e5, c in 0.1f64..10.0) {
            let av = alphas(&a);
            let base = optimal_split(&av, task).unwrap();
            let scaled = optimal_split(&av, c * task).unwrap();
            for (k, _) in av.iter() {
                prop_assert!(crate::numeric::rel_diff(scaled.load(k), c * base.load(k)) <= 1e-12);
            }
            let v0 = minmax_value(&av, task).unwrap();
            let v1 = minmax_value(&av, c * task).unwrap();
            prop_assert!(crate::numeric::rel_diff(v1, c * v0) <= 1e-12);
        }
    }
}
