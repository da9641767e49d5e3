//! CSV output for sweep aggregates and per-sample logs.

use std::io::{Read, Write};
use std::path::Path;

use super::sweep::{AggregateRow, Method, SampleRecord, SweepError, SweepParam};

pub const CSV_HEADER: [&str; 10] = [
    "param",
    "value",
    "method",
    "mean_objective",
    "std_objective",
    "mean_latency_term",
    "mean_coverage_gap",
    "mean_t_over_s",
    "samples",
    "seed",
];

pub const SAMPLES_HEADER: [&str; 10] = [
    "param",
    "value",
    "sample",
    "seed",
    "method",
    "objective",
    "latency_term",
    "normalized_latency",
    "coverage_gap",
    "t_over_s",
];

/// Formats `x` with 9 significant digits in the style of C's `%.9g`:
/// trailing zeros dropped, exponent form outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s.to_owned()
        }
    };
    if !(-4..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<(), csv::Error> {
    let mut w = writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.param.name().to_owned(),
            format_sig9(r.value),
            r.method.name().to_owned(),
            format_sig9(r.mean_objective),
            format_sig9(r.std_objective),
            format_sig9(r.mean_latency_term),
            format_sig9(r.mean_coverage_gap),
            format_sig9(r.mean_t_over_s),
            r.samples.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` to `path` as CSV.
pub fn emit_csv(rows: &[AggregateRow], path: &Path) -> Result<(), SweepError> {
    let to_err = |source| SweepError::Write {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(|e| to_err(e.into()))?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(to_err)
}

pub fn write_samples_csv<W: Write>(
    param: SweepParam,
    seed: u64,
    samples: &[SampleRecord],
    out: W,
) -> Result<(), csv::Error> {
    let mut w = writer(out);
    w.write_record(SAMPLES_HEADER)?;
    for s in samples {
        w.write_record([
            param.name().to_owned(),
            format_sig9(s.value),
            s.sample.to_string(),
            seed.to_string(),
            s.method.name().to_owned(),
            format_sig9(s.objective),
            format_sig9(s.latency_term),
            format_sig9(s.normalized_latency),
            s.coverage_gap.to_string(),
            format_sig9(s.t_over_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses aggregate rows written by [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<AggregateRow>, SweepError> {
    let bad = |msg: String| SweepError::Csv(msg);
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let float = |i: usize| -> Result<f64, SweepError> {
            record[i].parse().map_err(|_| {
                bad(format!(
                    "field {} is not a number: {}",
                    CSV_HEADER[i], &record[i]
                ))
            })
        };
        let int = |i: usize| -> Result<u64, SweepError> {
            record[i].parse().map_err(|_| {
                bad(format!(
                    "field {} is not an integer: {}",
                    CSV_HEADER[i], &record[i]
                ))
            })
        };
        rows.push(AggregateRow {
            param: record[0].parse()?,
            value: float(1)?,
            method: record[2].parse::<Method>()?,
            mean_objective: float(3)?,
            std_objective: float(4)?,
            mean_latency_term: float(5)?,
            mean_coverage_gap: float(6)?,
            mean_t_over_s: float(7)?,
            samples: int(8)? as usize,
            seed: int(9)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<AggregateRow>, SweepError> {
    let file = std::fs::File::open(path)
        .map_err(|e| SweepError::Csv(format!("{}: {e}", path.display())))?;
    parse_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(value: f64, mean: f64) -> AggregateRow {
        AggregateRow {
            param: SweepParam::Weight,
            value,
            method: Method::Proposed,
            mean_objective: mean,
            std_objective: 0.125,
            mean_latency_term: 1.234_567_891_23e-10,
            mean_coverage_gap: 1.5,
            mean_t_over_s: 3.3e-3,
            samples: 1000,
            seed: 42,
        }
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(20.0), "20");
        assert_eq!(format_sig9(0.25), "0.25");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(123_456_789.0), "123456789");
        assert_eq!(format_sig9(1_234_567_891.0), "1.23456789e+09");
        assert_eq!(format_sig9(1.5e-5), "1.5e-05");
        assert_eq!(format_sig9(1e-4), "0.0001");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(9.999_999_999_9), "10");
    }

    #[test]
    fn one_row_gives_two_lines() {
        let mut buf = Vec::new();
        write_csv(&[row(0.5, 2.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "param,value,method,mean_objective,std_objective,mean_latency_term,mean_coverage_gap,mean_t_over_s,samples,seed\n\
             weight,0.5,proposed,2,0.125,1.23456789e-10,1.5,0.0033,1000,42\n"
        );
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(parse_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn reparse_is_a_fixed_point(value in 0.0f64..1.0, mean in 0.0f64..10.0) {
            let mut first = Vec::new();
            write_csv(&[row(value, mean)], &mut first).unwrap();
            let parsed = parse_csv(first.as_slice()).unwrap();
            let mut second = Vec::new();
            write_csv(&parsed, &mut second).unwrap();
            prop_assert_eq!(&first, &second);
            prop_assert!((parsed[0].mean_objective - mean).abs() <= 1e-8 * mean.max(1e-300) + 1e-300);
        }
    }
}
