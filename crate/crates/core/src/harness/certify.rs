//! Quick certification suites run by the `oracle` and `selftest` commands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{benchmark1, benchmark2, benchmark3};
use crate::channel::{generate_instance, Purpose, RngStream, ScenarioConfig};
use crate::matching::{
    build_weight_matrix, hungarian_assign, matching_latency, reduction_assign, WeightMatrix,
};
use crate::model::{normalize, overall_latency, validate};
use crate::numeric::rel_diff;
use crate::oracle::{exhaustive_joint, exhaustive_matching};
use crate::scheduler::{find_improving_swap, swap_optimize, IMPROVEMENT_EPS};
use crate::task_alloc::{minmax_value, optimal_split, AlphaVector};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }

    fn from_result(name: &'static str, result: Result<String, String>) -> Self {
        match result {
            Ok(detail) => Self::new(name, true, detail),
            Err(detail) => Self::new(name, false, detail),
        }
    }
}

/// Scenario used for brute-force certification: 8 users, 4 subbands,
/// 5 subareas.
pub fn small_config(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n_users: 8,
        n_subbands: 4,
        n_subareas: 5,
        master_seed: seed,
        ..ScenarioConfig::default()
    }
}

pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> WeightMatrix {
    let data = (0..n * n).map(|_| rng.random_range(1e4..1e6)).collect();
    WeightMatrix::new((0..n).collect(), data).expect("positive entries")
}

fn matching_cross_check(seed: u64, count: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let w = random_matrix(5, &mut rng);
        let (_, best) = exhaustive_matching(&w).map_err(|e| e.to_string())?;
        let fast = w
            .total_weight(&hungarian_assign(&w))
            .map_err(|e| e.to_string())?;
        let slow = w
            .total_weight(&reduction_assign(&w))
            .map_err(|e| e.to_string())?;
        if fast != best || slow != best {
            return Err(format!(
                "matrix {i}: scan {best}, potentials {fast}, reduction {slow}"
            ));
        }
    }
    Ok(format!("{count} random 5x5 matrices agree exactly"))
}

/// Summary of swap search against the global optimum on small instances.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallInstanceStats {
    pub instances: usize,
    pub optimal: usize,
    pub mean_rel_gap: f64,
    pub max_rel_gap: f64,
}

/// Certifies the swap search on `instances` small scenarios: no improving
/// swap remains and the oracle optimum is never beaten.
pub fn certify_small_instances(seed: u64, instances: usize) -> Result<SmallInstanceStats, String> {
    let config = small_config(seed);
    let mut optimal = 0;
    let mut gap_sum = 0.0;
    let mut max_gap: f64 = 0.0;
    for sample in 0..instances as u64 {
        let inst = generate_instance(&config, sample).map_err(|e| e.to_string())?;
        let found = swap_optimize(&inst).map_err(|e| e.to_string())?;
        let best = exhaustive_joint(&inst).map_err(|e| e.to_string())?;
        let set = found.assignment.scheduled();
        if let Some((s, s_new, v)) =
            find_improving_swap(&set, &inst, inst.weight(), IMPROVEMENT_EPS)
                .map_err(|e| e.to_string())?
        {
            return Err(format!(
                "sample {sample}: swapping {s} for {s_new} improves {} to {v}",
                found.objective
            ));
        }
        if found.objective < best.objective {
            return Err(format!(
                "sample {sample}: search {} below oracle {}",
                found.objective, best.objective
            ));
        }
        let gap = (found.objective - best.objective) / best.objective.abs().max(f64::MIN_POSITIVE);
        if found.objective == best.objective {
            optimal += 1;
        }
        gap_sum += gap;
        max_gap = max_gap.max(gap);
    }
    Ok(SmallInstanceStats {
        instances,
        optimal,
        mean_rel_gap: gap_sum / instances as f64,
        max_rel_gap: max_gap,
    })
}

/// Brute-force certification run by the `oracle` command.
pub fn oracle_suite(seed: u64, instances: usize) -> Vec<Check> {
    let small = certify_small_instances(seed, instances).map(|s| {
        format!(
            "{} instances (K=8, N=4, M=5): locally optimal; {}/{} globally optimal; mean gap {:.3e}, max gap {:.3e}",
            s.instances, s.optimal, s.instances, s.mean_rel_gap, s.max_rel_gap
        )
    });
    vec![
        Check::from_result(
            "matching-vs-permutation-scan",
            matching_cross_check(seed, 200),
        ),
        Check::from_result("swap-search-vs-exhaustive", small),
    ]
}

fn normalize_check(seed: u64) -> Result<String, String> {
    let eta = 1e6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..10_000)
        .map(|_| rng.random_range(0.0..20.0 * eta))
        .collect();
    xs.sort_by(f64::total_cmp);
    let ys: Vec<f64> = xs.iter().map(|&x| normalize(x, eta)).collect();
    if let Some(y) = ys.iter().find(|y| !(0.0..1.0).contains(*y)) {
        return Err(format!("value {y} outside [0, 1)"));
    }
    for (w, x) in ys.windows(2).zip(xs.windows(2)) {
        if x[0] < x[1] && w[0] >= w[1] {
            return Err(format!("not increasing between {} and {}", x[0], x[1]));
        }
    }
    if normalize(0.0, eta) != 0.0 || (normalize(2.0 * eta * 3f64.ln(), eta) - 0.5).abs() > 1e-12 {
        return Err("anchor values wrong".into());
    }
    Ok("bounded, increasing, anchors exact".into())
}

fn split_check(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let size = rng.random_range(2..=10);
        let alphas = AlphaVector::new((0..size).map(|k| (k, rng.random_range(1e-7..1e-4))))
            .map_err(|e| e.to_string())?;
        let task = rng.random_range(1e3..1e4);
        let split = optimal_split(&alphas, task).map_err(|e| e.to_string())?;
        let value = minmax_value(&alphas, task).map_err(|e| e.to_string())?;
        if rel_diff(split.total(), task) > 1e-12 {
            return Err(format!("loads sum to {} for task {task}", split.total()));
        }
        for (k, a) in alphas.iter() {
            if rel_diff(a * split.load(k), value) > 1e-9 {
                return Err(format!(
                    "user {k} finishes at {} not {value}",
                    a * split.load(k)
                ));
            }
        }
    }
    Ok("200 random cost vectors equalized".into())
}

fn consistency_check(seed: u64) -> Result<String, String> {
    let config = ScenarioConfig {
        master_seed: seed,
        ..ScenarioConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sample in 0..50 {
        let inst = generate_instance(&config, sample).map_err(|e| e.to_string())?;
        let mut users: Vec<usize> = (0..inst.n_users()).collect();
        rand::seq::SliceRandom::shuffle(users.as_mut_slice(), &mut rng);
        let set = &users[..inst.n_subbands()];
        let w = build_weight_matrix(set, &inst).map_err(|e| e.to_string())?;
        let a = hungarian_assign(&w);
        let via_matching = matching_latency(&a, &w, inst.task_bits()).map_err(|e| e.to_string())?;
        let alphas = AlphaVector::from_assignment(&a, &inst).map_err(|e| e.to_string())?;
        let split = optimal_split(&alphas, inst.task_bits()).map_err(|e| e.to_string())?;
        let via_model = overall_latency(&a, &split, &inst);
        if rel_diff(via_matching, via_model) > 1e-12 {
            return Err(format!("sample {sample}: {via_matching} vs {via_model}"));
        }
    }
    Ok("matched latency equals max user latency on 50 sets".into())
}

fn baseline_check(seed: u64) -> Result<String, String> {
    let config = ScenarioConfig {
        master_seed: seed,
        ..ScenarioConfig::default()
    };
    let streams = RngStream::new(seed);
    for sample in 0..20 {
        let inst = generate_instance(&config, sample).map_err(|e| e.to_string())?;
        let mut rng = streams.stream(sample, Purpose::Baseline, 0);
        let reports = [
            swap_optimize(&inst),
            benchmark1(&inst),
            benchmark2(&inst, &mut rng),
            benchmark3(&inst),
        ];
        for r in reports {
            let r = r.map_err(|e| e.to_string())?;
            validate(&r.assignment, &r.allocation, &inst).map_err(|e| e.to_string())?;
        }
        let unit = inst.with_weight(1.0).map_err(|e| e.to_string())?;
        let (p, b) = (swap_optimize(&unit), benchmark1(&unit));
        if p != b {
            return Err(format!("sample {sample}: methods differ at w = 1"));
        }
    }
    Ok("all methods feasible; latency-only search coincides at w = 1".into())
}

fn determinism_check(seed: u64) -> Result<String, String> {
    let config = ScenarioConfig {
        master_seed: seed,
        ..ScenarioConfig::default()
    };
    for sample in 0..10 {
        let a = generate_instance(&config, sample).map_err(|e| e.to_string())?;
        let b = generate_instance(&config, sample).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("sample {sample} differs between calls"));
        }
    }
    Ok("instances reproduce bit for bit".into())
}

/// Invariant suites run by the `selftest` command.
pub fn selftest_suite(seed: u64) -> Vec<Check> {
    vec![
        Check::from_result("normalization", normalize_check(seed)),
        Check::from_result("equal-finish-split", split_check(seed)),
        Check::from_result("pairing-latency-consistency", consistency_check(seed)),
        Check::from_result("matching-solvers", matching_cross_check(seed, 50)),
        Check::from_result("baselines", baseline_check(seed)),
        Check::from_result("determinism", determinism_check(seed)),
    ]
}
