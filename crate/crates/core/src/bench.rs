//! Scaling measurements: partitioned against unpartitioned solving on
//! generated families, with a log-log exponent fit.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::gen::{self, ParameterError};
use crate::hierarchy::{solve_partitioned, BlockTree, PartitionError};
use crate::graph::ControlFlowGraph;
use crate::pipeline::{solve, SolveOptions};
use crate::reuse::ReuseError;

/// Families with a natural partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchFamily {
    /// Loop of alloc / body / dealloc iterations, three nodes each.
    FooChain,
    /// Alloc/dealloc pairs on one register, two nodes each.
    Serial,
    /// Independent alloc/compute/dealloc branches between a root and a sink.
    Fanout,
}

impl BenchFamily {
    pub fn name(self) -> &'static str {
        match self {
            BenchFamily::FooChain => "foo-chain",
            BenchFamily::Serial => "serial",
            BenchFamily::Fanout => "fanout",
        }
    }

    /// Instance with about `n` nodes.
    pub fn instance(self, n: usize) -> Result<(ControlFlowGraph, BlockTree), ParameterError> {
        match self {
            BenchFamily::FooChain => gen::foo_chain((n / 3).max(1), 1, 1),
            BenchFamily::Serial => gen::serial_alloc_dealloc((n / 2).max(1)),
            BenchFamily::Fanout => gen::fanout_fanin((n.saturating_sub(2) / 3).max(1), 1),
        }
    }
}

impl fmt::Display for BenchFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown family {0:?}, expected one of foo-chain, serial, fanout")]
pub struct UnknownFamily(pub String);

impl FromStr for BenchFamily {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [BenchFamily::FooChain, BenchFamily::Serial, BenchFamily::Fanout]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be positive")]
    NoRepetitions,
    #[error("sizes must be positive and strictly ascending")]
    Sizes,
    #[error(transparent)]
    Parameter(#[from] ParameterError),
    #[error(transparent)]
    Reuse(#[from] ReuseError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    /// Node count of the generated instance.
    pub n: usize,
    pub partitioned: bool,
    /// Median wall time over the repetitions.
    pub wall_time_s: f64,
    pub width: u64,
    pub depth: u64,
}

/// Which solvers to time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modes {
    #[default]
    Both,
    PartitionedOnly,
    UnpartitionedOnly,
}

impl Modes {
    fn runs(self) -> &'static [bool] {
        match self {
            Modes::Both => &[false, true],
            Modes::PartitionedOnly => &[true],
            Modes::UnpartitionedOnly => &[false],
        }
    }
}

/// Times both solvers on one instance per size; rows come out by size,
/// unpartitioned first.
pub fn run_bench(
    family: BenchFamily,
    sizes: &[usize],
    repetitions: usize,
    options: &SolveOptions,
) -> Result<Vec<BenchRow>, BenchError> {
    run_bench_modes(family, sizes, repetitions, options, Modes::Both)
}

pub fn run_bench_modes(
    family: BenchFamily,
    sizes: &[usize],
    repetitions: usize,
    options: &SolveOptions,
    modes: Modes,
) -> Result<Vec<BenchRow>, BenchError> {
    if repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    if sizes.first() == Some(&0) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Sizes);
    }
    let mut rows = Vec::new();
    for &size in sizes {
        let (graph, tree) = family.instance(size)?;
        for &partitioned in modes.runs() {
            let mut times = Vec::with_capacity(repetitions);
            let mut last = None;
            for _ in 0..repetitions {
                let start = Instant::now();
                let schedule = if partitioned {
                    solve_partitioned(&graph, &tree, options)?
                } else {
                    solve(&graph, options)?
                };
                times.push(start.elapsed().as_secs_f64());
                last = Some(schedule);
            }
            let schedule = last.expect("at least one repetition");
            rows.push(BenchRow {
                n: graph.len(),
                partitioned,
                wall_time_s: median(&mut times),
                width: schedule.width,
                depth: schedule.depth,
            });
        }
    }
    Ok(rows)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

/// Least-squares slope of `ln t` against `ln n`; `None` with fewer than two
/// distinct sizes or non-positive values.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(n, t)| n <= 0.0 || t <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Exponent fitted over the rows of one mode.
pub fn fit_rows(rows: &[BenchRow], partitioned: bool) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.partitioned == partitioned)
        .map(|r| (r.n as f64, r.wall_time_s))
        .collect();
    fit_exponent(&points)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(1.5))).collect();
        assert!((fit_exponent(&pts).unwrap() - 1.5).abs() < 1e-9);
        assert_eq!(fit_exponent(&[(10.0, 1.0)]), None);
        assert_eq!(fit_exponent(&[(10.0, 0.0), (20.0, 1.0)]), None);
    }

    #[test]
    fn two_rows_per_size_and_csv_header() {
        let rows = run_bench(BenchFamily::FooChain, &[30, 60], 1, &SolveOptions::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().filter(|r| r.partitioned).count(), 2);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,partitioned,wall_time_s,width,depth\n"), "{text}");
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn parameter_errors() {
        let opts = SolveOptions::default();
        assert!(matches!(
            run_bench(BenchFamily::Serial, &[10], 0, &opts),
            Err(BenchError::NoRepetitions)
        ));
        assert!(matches!(
            run_bench(BenchFamily::Serial, &[10, 10], 1, &opts),
            Err(BenchError::Sizes)
        ));
    }

    #[test]
    fn family_names_round_trip() {
        for f in [BenchFamily::FooChain, BenchFamily::Serial, BenchFamily::Fanout] {
            assert_eq!(f.name().parse::<BenchFamily>().unwrap(), f);
        }
        assert!("nope".parse::<BenchFamily>().is_err());
    }
}
