//! Monte Carlo experiment runner: sweeps, CSV output and the certification
//! suites behind the `oracle` and `selftest` commands.

pub mod certify;
pub mod output;
pub mod sweep;

pub use output::{
    emit_csv, format_sig9, parse_csv, read_csv, write_csv, write_samples_csv, CSV_HEADER,
    SAMPLES_HEADER,
};
pub use sweep::{
    run_sweep, run_sweep_detailed, solve_method, AggregateRow, Method, SampleRecord, SweepError,
    SweepOutput, SweepParam, SweepSpec, DEFAULT_SAMPLES,
};
