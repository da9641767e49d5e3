use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{benchmark1, benchmark2, benchmark3};
use crate::channel::{generate_instance, ChannelError, Purpose, RngStream, ScenarioConfig};
use crate::model::{ProblemInstance, SolutionReport};
use crate::numeric;
use crate::scheduler::{swap_optimize, ScheduleError};

/// Monte Carlo samples per sweep point unless overridden.
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one value")]
    NoValues,
    #[error("sweep needs at least one sample")]
    NoSamples,
    #[error("sweep needs at least one method")]
    NoMethods,
    #[error("{param} = {value} is not a valid sweep point: {reason}")]
    InvalidPoint {
        param: SweepParam,
        value: f64,
        reason: String,
    },
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
    #[error("sample {sample}: {source}")]
    Solve { sample: u64, source: ScheduleError },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: csv::Error },
    #[error("malformed CSV: {0}")]
    Csv(String),
}

/// Scenario dimension varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Users,
    Subbands,
    Subareas,
    Weight,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::Users => "users",
            Self::Subbands => "subbands",
            Self::Subareas => "subareas",
            Self::Weight => "weight",
        }
    }

    /// `base` with this parameter set to `value`, validated.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, SweepError> {
        let invalid = |reason: String| SweepError::InvalidPoint {
            param: self,
            value,
            reason,
        };
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(invalid("expected a positive integer".into()))
            }
        };
        let mut config = base.clone();
        match self {
            Self::Users => config.n_users = count()?,
            Self::Subbands => config.n_subbands = count()?,
            Self::Subareas => config.n_subareas = count()?,
            Self::Weight => config.weight = value,
        }
        config.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(config)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "users" | "K" => Ok(Self::Users),
            "subbands" | "N" => Ok(Self::Subbands),
            "subareas" | "M" => Ok(Self::Subareas),
            "weight" | "w" => Ok(Self::Weight),
            _ => Err(SweepError::UnknownName {
                kind: "sweep parameter",
                name: s.to_owned(),
            }),
        }
    }
}

/// Solution method compared in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Proposed,
    Benchmark1,
    Benchmark2,
    Benchmark3,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Proposed,
        Method::Benchmark1,
        Method::Benchmark2,
        Method::Benchmark3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::Benchmark1 => "benchmark1",
            Self::Benchmark2 => "benchmark2",
            Self::Benchmark3 => "benchmark3",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SweepError::UnknownName {
                kind: "method",
                name: s.to_owned(),
            })
    }
}

/// Solves sample `sample` of a scenario seeded by `master_seed` with `method`.
pub fn solve_method(
    method: Method,
    instance: &ProblemInstance,
    master_seed: u64,
    sample: u64,
) -> Result<SolutionReport, ScheduleError> {
    match method {
        Method::Proposed => swap_optimize(instance),
        Method::Benchmark1 => benchmark1(instance),
        Method::Benchmark2 => {
            let mut rng = RngStream::new(master_seed).stream(sample, Purpose::Baseline, 0);
            benchmark2(instance, &mut rng)
        }
        Method::Benchmark3 => benchmark3(instance),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub samples: usize,
    pub methods: Vec<Method>,
    pub base: ScenarioConfig,
}

impl SweepSpec {
    /// Scenario configs for every sweep point, in order.
    pub fn configs(&self) -> Result<Vec<ScenarioConfig>, SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::NoValues);
        }
        if self.samples == 0 {
            return Err(SweepError::NoSamples);
        }
        if self.methods.is_empty() {
            return Err(SweepError::NoMethods);
        }
        self.values
            .iter()
            .map(|&v| self.param.apply(&self.base, v))
            .collect()
    }
}

/// Per-(value, method) statistics of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub param: SweepParam,
    pub value: f64,
    pub method: Method,
    pub mean_objective: f64,
    /// Sample standard deviation of the objective.
    pub std_objective: f64,
    pub mean_latency_term: f64,
    pub mean_coverage_gap: f64,
    pub mean_t_over_s: f64,
    pub samples: usize,
    pub seed: u64,
}

/// One solved sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub value: f64,
    pub sample: u64,
    pub method: Method,
    pub objective: f64,
    pub latency_term: f64,
    pub normalized_latency: f64,
    pub coverage_gap: usize,
    pub t_over_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<AggregateRow>,
    /// Ordered by value, then sample, then method in `SweepSpec::methods` order.
    pub samples: Vec<SampleRecord>,
}

impl SweepOutput {
    /// Objectives of `method` at sweep point `value`, by sample index.
    pub fn objectives(&self, value: f64, method: Method) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.value == value && s.method == method)
            .map(|s| s.objective)
            .collect()
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<AggregateRow>, SweepError> {
    run_sweep_detailed(spec).map(|out| out.rows)
}

/// Runs every requested method on the same generated instance for each
/// (value, sample index), solving samples in parallel. Aggregation walks
/// samples in index order, so the output does not depend on the worker
/// count.
pub fn run_sweep_detailed(spec: &SweepSpec) -> Result<SweepOutput, SweepError> {
    let configs = spec.configs()?;
    let seed = spec.base.master_seed;
    let mut rows = Vec::new();
    let mut records = Vec::new();

    for (&value, config) in spec.values.iter().zip(&configs) {
        let solved: Vec<Vec<SampleRecord>> = (0..spec.samples as u64)
            .into_par_iter()
            .map(|sample| {
                let instance = generate_instance(config, sample)?;
                spec.methods
                    .iter()
                    .map(|&method| {
                        let r = solve_method(method, &instance, seed, sample)
                            .map_err(|source| SweepError::Solve { sample, source })?;
                        Ok(SampleRecord {
                            value,
                            sample,
                            method,
                            objective: r.objective,
                            latency_term: r.latency_term,
                            normalized_latency: r.normalized_latency,
                            coverage_gap: r.coverage_gap,
                            t_over_s: r.t_over,
                        })
                    })
                    .collect()
            })
            .collect::<Result<_, SweepError>>()?;

        for (idx, &method) in spec.methods.iter().enumerate() {
            let of_method: Vec<&SampleRecord> = solved.iter().map(|per| &per[idx]).collect();
            rows.push(aggregate(spec.param, value, method, seed, &of_method));
        }
        records.extend(solved.into_iter().flatten());
    }
    Ok(SweepOutput {
        rows,
        samples: records,
    })
}

fn mean(values: &[f64]) -> f64 {
    numeric::sum(values.iter().copied()) / values.len() as f64
}

fn aggregate(
    param: SweepParam,
    value: f64,
    method: Method,
    seed: u64,
    records: &[&SampleRecord],
) -> AggregateRow {
    let n = records.len();
    let column =
        |f: fn(&SampleRecord) -> f64| -> Vec<f64> { records.iter().map(|r| f(r)).collect() };
    let objectives = column(|r| r.objective);
    let mean_objective = mean(&objectives);
    let std_objective = if n > 1 {
        let ss = numeric::sum(objectives.iter().map(|x| (x - mean_objective).powi(2)));
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    AggregateRow {
        param,
        value,
        method,
        mean_objective,
        std_objective,
        mean_latency_term: mean(&column(|r| r.latency_term)),
        mean_coverage_gap: mean(&column(|r| r.coverage_gap as f64)),
        mean_t_over_s: mean(&column(|r| r.t_over_s)),
        samples: n,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(param: SweepParam, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            param,
            values,
            samples: 12,
            methods: Method::ALL.to_vec(),
            base: ScenarioConfig {
                n_users: 10,
                n_subbands: 4,
                n_subareas: 5,
                master_seed: 5,
                ..ScenarioConfig::default()
            },
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("weight".parse::<SweepParam>().unwrap(), SweepParam::Weight);
        assert_eq!("benchmark2".parse::<Method>().unwrap(), Method::Benchmark2);
        assert!("benchmark9".parse::<Method>().is_err());
        assert!("colour".parse::<SweepParam>().is_err());
    }

    #[test]
    fn rejects_points_breaking_k_gt_n() {
        let spec = small_spec(SweepParam::Users, vec![8.0, 4.0]);
        let err = spec.configs().unwrap_err().to_string();
        assert!(err.contains("K > N"), "{err}");
        let spec = small_spec(SweepParam::Subbands, vec![2.5]);
        assert!(spec.configs().is_err());
    }

    #[test]
    fn rows_follow_values_then_methods() {
        let spec = small_spec(SweepParam::Weight, vec![0.0, 1.0]);
        let out = run_sweep_detailed(&spec).unwrap();
        assert_eq!(out.rows.len(), 8);
        assert_eq!(out.samples.len(), 2 * 12 * 4);
        for (i, row) in out.rows.iter().enumerate() {
            assert_eq!(row.value, spec.values[i / 4]);
            assert_eq!(row.method, Method::ALL[i % 4]);
            assert_eq!(row.samples, 12);
            let w = row.value;
            let recomposed = row.mean_latency_term + (1.0 - w) * row.mean_coverage_gap;
            assert!((row.mean_objective - recomposed).abs() <= 1e-9);
        }
        assert_eq!(
            out.objectives(1.0, Method::Proposed),
            out.objectives(1.0, Method::Benchmark1)
        );
    }

    #[test]
    fn aggregates_match_sample_log() {
        let spec = small_spec(SweepParam::Subareas, vec![3.0, 6.0]);
        let out = run_sweep_detailed(&spec).unwrap();
        for row in &out.rows {
            let xs = out.objectives(row.value, row.method);
            assert_eq!(xs.len(), row.samples);
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            assert!((m - row.mean_objective).abs() <= 1e-12 * m.abs().max(1.0));
        }
    }
}
