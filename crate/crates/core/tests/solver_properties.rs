use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crowdsense_core::baselines::benchmark1;
use crowdsense_core::channel::{generate_instance, generate_sample, ScenarioConfig};
use crowdsense_core::io::read_instance;
use crowdsense_core::oracle::exhaustive_joint;
use crowdsense_core::scheduler::{evaluate_set, swap_optimize};
use crowdsense_core::task_alloc::{minmax_value, AlphaVector};
use crowdsense_core::{ProblemInstance, SolutionReport};

fn fixture(name: &str) -> ProblemInstance {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    read_instance(&path).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Rescores a report straight from the raw user parameters and loads.
fn rescore(report: &SolutionReport, inst: &ProblemInstance) -> f64 {
    let mut t_over: f64 = 0.0;
    let mut areas = Vec::new();
    for &(k, n) in report.assignment.pairs() {
        let u = inst.user(k);
        let b = inst.bandwidth(n);
        let rate = b * (1.0 + u.tx_power * u.gains[n] / (inst.noise_density() * b)).log2();
        let d = report.allocation.load(k);
        t_over = t_over.max(d / u.sensing_rate + d / rate);
        if !areas.contains(&u.subarea) {
            areas.push(u.subarea);
        }
    }
    let e = (-t_over / (2.0 * inst.scale())).exp_m1();
    let norm = -e / (2.0 + e);
    let gap = (inst.n_subareas() - areas.len()) as f64;
    inst.weight() * norm + (1.0 - inst.weight()) * gap
}

#[test]
fn random_splits_never_beat_the_equal_finish_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let size = rng.random_range(2..=6);
        let a: Vec<f64> = (0..size).map(|_| rng.random_range(1e-7..1e-4)).collect();
        let alphas = AlphaVector::new(a.iter().copied().enumerate()).unwrap();
        let task = 5000.0;
        let best = minmax_value(&alphas, task).unwrap();
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..size).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let worst = raw
                .iter()
                .zip(&a)
                .map(|(r, a)| a * task * r / total)
                .fold(0.0, f64::max);
            assert!(worst >= best * (1.0 - 1e-12), "{worst} < {best}");
        }
    }
}

#[test]
fn fixture_pair_sets_match_enumerated_pairings() {
    let inst = fixture("k4_n2.toml");
    let task = inst.task_bits();
    for i in 0..4 {
        for j in i + 1..4 {
            let report = evaluate_set(&[i, j], &inst).unwrap();
            let best_t = [(0, 1), (1, 0)]
                .iter()
                .map(|&(ni, nj)| {
                    let inv = |k: usize, n: usize| {
                        let u = inst.user(k);
                        let b = inst.bandwidth(n);
                        let r =
                            b * (1.0 + u.tx_power * u.gains[n] / (inst.noise_density() * b)).log2();
                        1.0 / (1.0 / u.sensing_rate + 1.0 / r)
                    };
                    task / (inv(i, ni) + inv(j, nj))
                })
                .fold(f64::INFINITY, f64::min);
            assert!(rel(report.t_over, best_t) <= 1e-12, "{i},{j}");
        }
    }
}

#[test]
fn fixture_search_reaches_the_global_optimum() {
    let inst = fixture("k4_n2.toml");
    let found = swap_optimize(&inst).unwrap();
    let best = exhaustive_joint(&inst).unwrap();
    assert_eq!(found.objective, best.objective);
}

#[test]
fn reported_objective_matches_raw_rescoring() {
    let config = ScenarioConfig::default();
    for sample in 0..20 {
        let inst = generate_instance(&config, sample).unwrap();
        let report = swap_optimize(&inst).unwrap();
        assert!(rel(report.objective, rescore(&report, &inst)) <= 1e-12);
    }
}

#[test]
fn latency_only_search_loses_coverage_on_fixture() {
    let inst = fixture("k8_n4.toml");
    assert_eq!(inst.weight(), 0.5);
    let proposed = swap_optimize(&inst).unwrap();
    let b1 = benchmark1(&inst).unwrap();
    assert!(b1.coverage < proposed.coverage);
    assert!(b1.objective > proposed.objective);
    let best = exhaustive_joint(&inst).unwrap();
    assert!(proposed.objective >= best.objective);
}

#[test]
fn latency_only_search_is_faster_on_average() {
    let config = ScenarioConfig::default();
    let (mut p_sum, mut b_sum) = (0.0, 0.0);
    for sample in 0..200 {
        let inst = generate_instance(&config, sample).unwrap();
        p_sum += swap_optimize(&inst).unwrap().t_over;
        b_sum += benchmark1(&inst).unwrap().t_over;
    }
    assert!(b_sum <= p_sum, "{b_sum} > {p_sum}");
}

#[test]
fn mean_user_distance_is_the_range_midpoint() {
    let config = ScenarioConfig::default();
    let mut total = 0.0;
    let mut count = 0;
    for sample in 0..10_000 {
        let s = generate_sample(&config, sample).unwrap();
        total += s.distances_m.iter().sum::<f64>();
        count += s.distances_m.len();
    }
    let mean = total / count as f64;
    assert!((mean - 175.0).abs() <= 2.0, "{mean}");
}
