//! Network model: users, subbands, schedules and the shared evaluation
//! functions (latency, rate, coverage, objective).
//!
//! Every solver and baseline in the crate scores its output through
//! [`objective`], so methods are always compared under the same formula:
//!
//! ```text
//! w · Norm(T_over, η) + (1 − w) · (M − covered subareas)
//! ```
//!
//! Channel gains are linear. Subarea indices are 0-based here; the file
//! formats in [`crate::io`] shift them to 1-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a user, dense in `0..K`.
pub type UserId = usize;

/// Relative slack allowed when checking the task-coverage and load-bound
/// constraints, to absorb rounding in closed-form splits.
pub const CONSTRAINT_REL_TOL: f64 = 1e-9;

/// One sensing user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: UserId,
    /// Sensing rate in bits per second.
    pub sensing_rate: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// 0-based subarea label.
    pub subarea: usize,
    /// Linear channel gain on each subband.
    pub gains: Vec<f64>,
}

/// Scenario-wide parameters shared by all users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Bandwidth of each subband in Hz; its length is the subband count.
    pub bandwidths: Vec<f64>,
    /// Noise power spectral density in W/Hz.
    pub noise_density: f64,
    /// Size of the published sensing task in bits.
    pub task_bits: f64,
    pub n_subareas: usize,
    /// Latency weight `w` in `[0, 1]`; coverage gets `1 − w`.
    pub weight: f64,
    /// Scaling factor of the latency normalization.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("an instance needs more users than subbands (K > N), got K = {users}, N = {subbands}")]
    TooFewUsers { users: usize, subbands: usize },
    #[error("an instance needs at least one subband")]
    NoSubbands,
    #[error("an instance needs at least one subarea")]
    NoSubareas,
    #[error("task size must be positive and finite, got {0}")]
    TaskBits(f64),
    #[error("weight must lie in [0, 1], got {0}")]
    Weight(f64),
    #[error("normalization scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("noise density must be positive and finite, got {0}")]
    NoiseDensity(f64),
    #[error("bandwidth of subband {subband} must be positive and finite, got {value}")]
    Bandwidth { subband: usize, value: f64 },
    #[error("user ids must be distinct and cover 0..{users}; id {id} is out of place")]
    UserIds { id: UserId, users: usize },
    #[error("user {user}: {what} must be positive and finite, got {value}")]
    UserParam {
        user: UserId,
        what: &'static str,
        value: f64,
    },
    #[error("user {user} has {got} channel gains, expected one per subband ({expected})")]
    GainCount {
        user: UserId,
        got: usize,
        expected: usize,
    },
    #[error("user {user} is in subarea {subarea}, but the instance has {subareas} subareas")]
    Subarea {
        user: UserId,
        subarea: usize,
        subareas: usize,
    },
}

/// A validated scenario. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInstance {
    users: Vec<UserProfile>,
    params: NetworkParams,
}

impl ProblemInstance {
    /// Validates and builds an instance. Users may arrive in any order; they
    /// are stored sorted by id.
    pub fn new(mut users: Vec<UserProfile>, params: NetworkParams) -> Result<Self, ModelError> {
        let n = params.bandwidths.len();
        if n == 0 {
            return Err(ModelError::NoSubbands);
        }
        if users.len() <= n {
            return Err(ModelError::TooFewUsers {
                users: users.len(),
                subbands: n,
            });
        }
        if params.n_subareas == 0 {
            return Err(ModelError::NoSubareas);
        }
        if !(params.task_bits > 0.0 && params.task_bits.is_finite()) {
            return Err(ModelError::TaskBits(params.task_bits));
        }
        if !(0.0..=1.0).contains(&params.weight) {
            return Err(ModelError::Weight(params.weight));
        }
        if !(params.scale > 0.0 && params.scale.is_finite()) {
            return Err(ModelError::Scale(params.scale));
        }
        if !(params.noise_density > 0.0 && params.noise_density.is_finite()) {
            return Err(ModelError::NoiseDensity(params.noise_density));
        }
        for (subband, &value) in params.bandwidths.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::Bandwidth { subband, value });
            }
        }

        users.sort_by_key(|u| u.id);
        let k = users.len();
        for (position, user) in users.iter().enumerate() {
            if user.id != position {
                return Err(ModelError::UserIds {
                    id: user.id,
                    users: k,
                });
            }
            let positive = |what: &'static str, value: f64| {
                if value > 0.0 && value.is_finite() {
                    Ok(())
                } else {
                    Err(ModelError::UserParam {
                        user: user.id,
                        what,
                        value,
                    })
                }
            };
            positive("sensing rate", user.sensing_rate)?;
            positive("transmit power", user.tx_power)?;
            if user.gains.len() != n {
                return Err(ModelError::GainCount {
                    user: user.id,
                    got: user.gains.len(),
                    expected: n,
                });
            }
            for &g in &user.gains {
                positive("channel gain", g)?;
            }
            if user.subarea >= params.n_subareas {
                return Err(ModelError::Subarea {
                    user: user.id,
                    subarea: user.subarea,
                    subareas: params.n_subareas,
                });
            }
        }
        Ok(Self { users, params })
    }

    /// Same scenario under a different latency weight.
    pub fn with_weight(&self, weight: f64) -> Result<Self, ModelError> {
        let mut params = self.params.clone();
        params.weight = weight;
        Self::new(self.users.clone(), params)
    }

    pub fn users(&self) -> &[UserProfile] {
        &self.users
    }

    /// # Panics
    /// If `id` is not a user of this instance.
    pub fn user(&self, id: UserId) -> &UserProfile {
        &self.users[id]
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_subbands(&self) -> usize {
        self.params.bandwidths.len()
    }

    pub fn n_subareas(&self) -> usize {
        self.params.n_subareas
    }

    pub fn bandwidth(&self, subband: usize) -> f64 {
        self.params.bandwidths[subband]
    }

    pub fn noise_density(&self) -> f64 {
        self.params.noise_density
    }

    pub fn task_bits(&self) -> f64 {
        self.params.task_bits
    }

    pub fn weight(&self) -> f64 {
        self.params.weight
    }

    pub fn scale(&self) -> f64 {
        self.params.scale
    }
}

/// Violation of one of the feasibility constraints of the joint problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintViolation {
    #[error("C1: allocation carries {allocated} bits but the task needs {required}")]
    TaskNotCovered { allocated: f64, required: f64 },
    #[error("C2: user {user} carries {load} bits without holding a subband")]
    LoadWithoutSubband { user: UserId, load: f64 },
    #[error("C3: load {load} of user {user} lies outside [0, {max}]")]
    LoadOutOfRange { user: UserId, load: f64, max: f64 },
    #[error("C4: subband {subband} is assigned to more than one user")]
    SubbandShared { subband: usize },
    #[error("C5: user {user} is assigned more than one subband")]
    UserOnManySubbands { user: UserId },
    #[error("user {user} does not exist in the instance")]
    UnknownUser { user: UserId },
    #[error("subband {subband} does not exist in the instance")]
    UnknownSubband { subband: usize },
}

impl ConstraintViolation {
    /// Label of the violated constraint (`"C1"` … `"C5"`), if any.
    pub fn constraint(&self) -> Option<&'static str> {
        match self {
            Self::TaskNotCovered { .. } => Some("C1"),
            Self::LoadWithoutSubband { .. } => Some("C2"),
            Self::LoadOutOfRange { .. } => Some("C3"),
            Self::SubbandShared { .. } => Some("C4"),
            Self::UserOnManySubbands { .. } => Some("C5"),
            Self::UnknownUser { .. } | Self::UnknownSubband { .. } => None,
        }
    }
}

/// One-to-one pairing of scheduled users with subbands.
///
/// A user is scheduled exactly when it appears in a pair. Pairs are kept
/// sorted by subband.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pairs: Vec<(UserId, usize)>,
}

impl Assignment {
    /// Builds an assignment from `(user, subband)` pairs, rejecting a
    /// subband used twice (C4) or a user holding two subbands (C5).
    pub fn from_pairs<I>(pairs: I) -> Result<Self, ConstraintViolation>
    where
        I: IntoIterator<Item = (UserId, usize)>,
    {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_by_key(|&(user, subband)| (subband, user));
        for w in pairs.windows(2) {
            if w[0].1 == w[1].1 {
                return Err(ConstraintViolation::SubbandShared { subband: w[0].1 });
            }
        }
        let mut users: Vec<_> = pairs.iter().map(|p| p.0).collect();
        users.sort_unstable();
        for w in users.windows(2) {
            if w[0] == w[1] {
                return Err(ConstraintViolation::UserOnManySubbands { user: w[0] });
            }
        }
        Ok(Self { pairs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `(user, subband)` pairs in ascending subband order.
    pub fn pairs(&self) -> &[(UserId, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Scheduled users, ascending.
    pub fn scheduled(&self) -> Vec<UserId> {
        let mut users: Vec<_> = self.pairs.iter().map(|p| p.0).collect();
        users.sort_unstable();
        users
    }

    pub fn is_scheduled(&self, user: UserId) -> bool {
        self.pairs.iter().any(|p| p.0 == user)
    }

    pub fn subband_of(&self, user: UserId) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == user).map(|p| p.1)
    }

    pub fn user_on(&self, subband: usize) -> Option<UserId> {
        self.pairs.iter().find(|p| p.1 == subband).map(|p| p.0)
    }
}

/// Sensing bits per scheduled user. Users without an entry carry zero bits.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    loads: BTreeMap<UserId, f64>,
}

impl Allocation {
    pub fn new(loads: BTreeMap<UserId, f64>) -> Self {
        Self { loads }
    }

    pub fn load(&self, user: UserId) -> f64 {
        self.loads.get(&user).copied().unwrap_or(0.0)
    }

    pub fn loads(&self) -> &BTreeMap<UserId, f64> {
        &self.loads
    }

    pub fn total(&self) -> f64 {
        crate::numeric::sum(self.loads.values().copied())
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }
}

impl FromIterator<(UserId, f64)> for Allocation {
    fn from_iter<T: IntoIterator<Item = (UserId, f64)>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Search counters attached to a report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Full passes over the swap neighbourhood.
    pub passes: usize,
    /// Candidate sets scored.
    pub evaluations: usize,
    /// Assignment-problem solves.
    pub matching_calls: usize,
    pub accepted_swaps: usize,
    /// The search stopped because a pass accepted nothing.
    pub fixed_point: bool,
}

/// A scored joint solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub objective: f64,
    /// `w · Norm(T_over, η)`.
    pub latency_term: f64,
    /// `Norm(T_over, η)` without the weight.
    pub normalized_latency: f64,
    /// `M` minus the number of covered subareas.
    pub coverage_gap: usize,
    pub coverage: usize,
    /// Completion time of the slowest scheduled user, in seconds.
    pub t_over: f64,
    /// Weight the report was scored under.
    pub weight: f64,
    pub assignment: Assignment,
    pub allocation: Allocation,
    pub diagnostics: Diagnostics,
}

impl SolutionReport {
    /// The coverage half of the objective, `(1 − w) · gap`.
    pub fn coverage_term(&self) -> f64 {
        (1.0 - self.weight) * self.coverage_gap as f64
    }
}

/// Time for `user` to sense `load` bits.
pub fn sensing_latency(user: &UserProfile, load: f64) -> f64 {
    load / user.sensing_rate
}

/// Shannon rate of `user` alone on `subband`, in bits per second.
pub fn transmission_rate(user: &UserProfile, subband: usize, instance: &ProblemInstance) -> f64 {
    let bandwidth = instance.bandwidth(subband);
    let snr = user.tx_power * user.gains[subband] / (instance.noise_density() * bandwidth);
    bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

/// Per-bit completion cost `1/v + 1/R` of `user` on `subband`, in s/bit.
pub fn per_bit_cost(user: &UserProfile, subband: usize, instance: &ProblemInstance) -> f64 {
    1.0 / user.sensing_rate + 1.0 / transmission_rate(user, subband, instance)
}

/// Sensing plus transmission time of `load` bits for `user` on `subband`.
pub fn total_latency(
    user: &UserProfile,
    subband: usize,
    load: f64,
    instance: &ProblemInstance,
) -> f64 {
    sensing_latency(user, load) + load / transmission_rate(user, subband, instance)
}

/// Completion time of the slowest scheduled user; zero for an empty
/// assignment.
pub fn overall_latency(
    assignment: &Assignment,
    allocation: &Allocation,
    instance: &ProblemInstance,
) -> f64 {
    assignment
        .pairs()
        .iter()
        .map(|&(k, n)| total_latency(instance.user(k), n, allocation.load(k), instance))
        .fold(0.0, f64::max)
}

/// Number of distinct subareas among scheduled users.
pub fn coverage_metric(assignment: &Assignment, instance: &ProblemInstance) -> usize {
    let mut seen = vec![false; instance.n_subareas()];
    let mut count = 0;
    for &(k, _) in assignment.pairs() {
        let area = instance.user(k).subarea;
        if !seen[area] {
            seen[area] = true;
            count += 1;
        }
    }
    count
}

/// Squashes a latency into `[0, 1)`: `2 / (1 + exp(−x / 2η)) − 1`.
///
/// Evaluated as the equivalent `tanh(x / 4η)`, which keeps full relative
/// precision for `x ≪ η` where the logistic form cancels. Saturates to 1.0
/// in double precision once `x` exceeds roughly `76η`.
pub fn normalize(x: f64, scale: f64) -> f64 {
    (x / (4.0 * scale)).tanh()
}

/// Checks C1–C5 for `(assignment, allocation)` against `instance`.
pub fn validate(
    assignment: &Assignment,
    allocation: &Allocation,
    instance: &ProblemInstance,
) -> Result<(), ConstraintViolation> {
    for &(user, subband) in assignment.pairs() {
        if user >= instance.n_users() {
            return Err(ConstraintViolation::UnknownUser { user });
        }
        if subband >= instance.n_subbands() {
            return Err(ConstraintViolation::UnknownSubband { subband });
        }
    }
    let required = instance.task_bits();
    let max = required * (1.0 + CONSTRAINT_REL_TOL);
    for (&user, &load) in allocation.loads() {
        if user >= instance.n_users() {
            return Err(ConstraintViolation::UnknownUser { user });
        }
        if !(0.0..=max).contains(&load) {
            return Err(ConstraintViolation::LoadOutOfRange {
                user,
                load,
                max: required,
            });
        }
        if load > 0.0 && !assignment.is_scheduled(user) {
            return Err(ConstraintViolation::LoadWithoutSubband { user, load });
        }
    }
    let allocated = allocation.total();
    if allocated < required * (1.0 - CONSTRAINT_REL_TOL) {
        return Err(ConstraintViolation::TaskNotCovered {
            allocated,
            required,
        });
    }
    Ok(())
}

/// Validates and scores a solution under the instance's own weight.
pub fn objective(
    assignment: &Assignment,
    allocation: &Allocation,
    instance: &ProblemInstance,
) -> Result<SolutionReport, ConstraintViolation> {
    objective_with_weight(assignment, allocation, instance, instance.weight())
}

/// Validates and scores a solution under an explicit latency weight.
pub fn objective_with_weight(
    assignment: &Assignment,
    allocation: &Allocation,
    instance: &ProblemInstance,
    weight: f64,
) -> Result<SolutionReport, ConstraintViolation> {
    validate(assignment, allocation, instance)?;
    let t_over = overall_latency(assignment, allocation, instance);
    let coverage = coverage_metric(assignment, instance);
    let coverage_gap = instance.n_subareas() - coverage;
    let normalized_latency = normalize(t_over, instance.scale());
    let latency_term = weight * normalized_latency;
    Ok(SolutionReport {
        objective: latency_term + (1.0 - weight) * coverage_gap as f64,
        latency_term,
        normalized_latency,
        coverage_gap,
        coverage,
        t_over,
        weight,
        assignment: assignment.clone(),
        allocation: allocation.clone(),
        diagnostics: Diagnostics::default(),
    })
}
