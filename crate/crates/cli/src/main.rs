use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crowdsense_core::channel::{generate_instance, ScenarioConfig};
use crowdsense_core::harness::certify::{oracle_suite, selftest_suite, Check};
use crowdsense_core::harness::{
    run_sweep_detailed, solve_method, write_csv, write_samples_csv, Method, SweepSpec,
    DEFAULT_SAMPLES,
};
use crowdsense_core::io::{read_config, read_instance};

#[derive(Parser)]
#[command(
    name = "crowdsense",
    version,
    about = "Mobile crowdsensing resource allocation simulator"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over one scenario parameter, written as CSV.
    Sweep(SweepArgs),
    /// Solve one instance and print the report as JSON.
    Solve(SolveArgs),
    /// Check the swap search and matching against brute force.
    Oracle {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
    /// Run the invariant suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// users (K), subbands (N), subareas (M) or weight (w).
    #[arg(long)]
    param: String,
    /// Comma-separated sweep points.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of proposed, benchmark1, benchmark2, benchmark3.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// TOML scenario config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one row per (value, sample, method) here.
    #[arg(long)]
    dump_samples: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// TOML scenario config to generate the instance from.
    #[arg(long, conflicts_with = "instance")]
    config: Option<PathBuf>,
    /// TOML instance file.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample index of the generated instance.
    #[arg(long, default_value_t = 0)]
    sample: u64,
    #[arg(long, default_value = "proposed")]
    method: String,
}

fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = match path {
        Some(p) => read_config(p).with_context(|| format!("loading config {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let methods = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_, _>>()?
    };
    let spec = SweepSpec {
        param: args.param.parse()?,
        values: args.values,
        samples: args.samples,
        methods,
        base: load_config(args.config.as_ref(), args.seed)?,
    };
    let output = run_sweep_detailed(&spec)?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&output.rows, BufWriter::new(file))?;
        }
        None => write_csv(&output.rows, io::stdout().lock())?,
    }
    if let Some(path) = &args.dump_samples {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_samples_csv(
            spec.param,
            spec.base.master_seed,
            &output.samples,
            BufWriter::new(file),
        )?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let (instance, seed) = match &args.instance {
        Some(path) => {
            let inst = read_instance(path)
                .with_context(|| format!("loading instance {}", path.display()))?;
            (inst, args.seed.unwrap_or(0))
        }
        None => {
            let config = load_config(args.config.as_ref(), args.seed)?;
            (generate_instance(&config, args.sample)?, config.master_seed)
        }
    };
    let report = solve_method(method, &instance, seed, args.sample)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    Ok(())
}

fn report(checks: &[Check]) -> Result<()> {
    for c in checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Solve(args) => solve(args),
        Command::Oracle { seed, instances } => report(&oracle_suite(seed, instances)),
        Command::Selftest { seed } => report(&selftest_suite(seed)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use crowdsense_core::harness::SweepParam;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sweep_values_split_on_commas() {
        let cli =
            Cli::try_parse_from(["crowdsense", "sweep", "--param", "w", "--values", "0,0.5,1"])
                .unwrap();
        match cli.command {
            Command::Sweep(a) => assert_eq!(a.values, vec![0.0, 0.5, 1.0]),
            _ => panic!("expected sweep"),
        }
    }

    #[test]
    fn unknown_flag_is_rejected() {
        assert!(Cli::try_parse_from(["crowdsense", "sweep", "--bogus"]).is_err());
    }

    #[test]
    fn param_aliases() {
        assert_eq!("K".parse::<SweepParam>().unwrap(), SweepParam::Users);
    }
}
