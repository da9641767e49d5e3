//! Coverage-aware resource allocation for mobile crowdsensing.
//!
//! A base station publishes a sensing task of `d̄` bits and recruits users to
//! sense and upload it over `N` orthogonal subbands. This crate picks which
//! users to schedule, which subband each one transmits on and how many bits
//! each one senses, minimising
//!
//! ```text
//! w · Norm(T_over, η) + (1 − w) · (M − covered subareas)
//! ```
//!
//! Layers, bottom up:
//! * [`model`]: users, schedules and the shared evaluation functions;
//! * [`task_alloc`]: equal-finish split of the task over a paired set;
//! * [`matching`]: optimal subband pairing of a scheduled set;
//! * [`scheduler`]: two-sided swap search over scheduled sets;
//! * [`baselines`]: the comparison policies;
//! * [`channel`]: seeded scenario generation;
//! * [`oracle`]: brute-force references for small instances;
//! * [`harness`]: Monte Carlo sweeps and CSV output.

pub mod baselines;
pub mod channel;
pub mod harness;
pub mod io;
pub mod matching;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod scheduler;
pub mod task_alloc;

pub use channel::{generate_instance, ScenarioConfig};
pub use model::{Allocation, Assignment, ProblemInstance, SolutionReport, UserId, UserProfile};
pub use scheduler::swap_optimize;
