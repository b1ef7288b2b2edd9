use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qrecycle_core::bench::{fit_rows, run_bench_modes, write_csv, BenchFamily, Modes};
use qrecycle_core::gen::{self, GraphFamily, RoleMix};
use qrecycle_core::hierarchy::PartitionError;
use qrecycle_core::io::{from_json, graph_to_json, parse_graph, to_json};
use qrecycle_core::oracle::enumerate_min_width;
use qrecycle_core::reuse::{check_depth_data, PathSemantics, ReuseError};
use qrecycle_core::{
    solve, solve_partitioned, BlockTree, ControlFlowGraph, Execution, GraphError, Schedule, SolveOptions, Strategy,
};

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_PARTITION: u8 = 5;
const EXIT_CONFIG: u8 = 6;

/// Schedules a control flow graph of quantum operations for qubit reuse.
#[derive(Parser)]
#[command(name = "qrecycle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sort a graph, bind released qubits to later requests and report the result.
    Run(RunArgs),
    /// Write a generated graph (and its natural partition, if any).
    Gen(GenArgs),
    /// Time partitioned against unpartitioned solving and write CSV rows.
    Bench(BenchArgs),
    /// Compare the heuristic with the exhaustive minimum on a small graph.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    None,
    Greedy,
    Dependency,
    Depth,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::None => Strategy::NoReuse,
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Dependency => Strategy::DependencyPreserving,
            StrategyArg::Depth => Strategy::DepthPreserving,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Longest,
    Shortest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    /// Reuse strategy.
    #[arg(long, value_enum, default_value = "greedy")]
    strategy: StrategyArg,
    /// Do not schedule auxiliary-qubit nodes ahead of other nodes.
    #[arg(long)]
    no_aux_priority: bool,
    /// How depth accumulates through a node's internal paths.
    #[arg(long, value_enum, default_value = "longest")]
    semantics: SemanticsArg,
    /// Solve blocks one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

impl SolveArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            strategy: self.strategy.into(),
            prioritize_aux: !self.no_aux_priority,
            semantics: match self.semantics {
                SemanticsArg::Longest => PathSemantics::Longest,
                SemanticsArg::Shortest => PathSemantics::Shortest,
            },
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Graph JSON file.
    graph: PathBuf,
    #[command(flatten)]
    solve: SolveArgs,
    /// Solve block by block; needs --blocks.
    #[arg(long)]
    partitioned: bool,
    /// Block tree JSON file; implies --partitioned.
    #[arg(long)]
    blocks: Option<PathBuf>,
    /// Schedule JSON destination; without it the schedule goes to stdout and
    /// the report to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: FamilyArg,
    /// Graph JSON destination (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Where to write the family's natural block tree.
    #[arg(long, global = true)]
    blocks_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FamilyArg {
    /// Loop iterations of alloc, body and dealloc around one register.
    FooChain {
        #[arg(long)]
        iterations: usize,
        #[arg(long, default_value_t = 1)]
        body: usize,
        #[arg(long, default_value_t = 1)]
        aux: u32,
    },
    /// Alloc/dealloc pairs on one register.
    Serial {
        #[arg(long)]
        pairs: usize,
    },
    /// Independent branches between a root and a sink.
    Fanout {
        #[arg(long)]
        branches: usize,
        #[arg(long, default_value_t = 1)]
        branch_len: usize,
    },
    /// Random sparse graph that conserves qubit flow.
    Random {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0.2)]
        allocating: f64,
        #[arg(long, default_value_t = 0.2)]
        releasing: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Both,
    Partitioned,
    Unpartitioned,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "foo-chain")]
    family: String,
    /// Ascending instance sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 3000, 10000])]
    sizes: Vec<usize>,
    /// Timed runs per instance; the median is reported.
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[command(flatten)]
    solve: SolveArgs,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Graph JSON file.
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
}

/// An error with the exit code it maps to.
struct Failure(u8, anyhow::Error);

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure(code, e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Gen(args) => generate(args),
        Command::Bench(args) => bench(args),
        Command::Oracle(args) => oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, err)) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(code)
        }
    }
}

/// The cause chain, skipping causes already quoted by the message above them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !last.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
        last = text;
    }
    out
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .exit_with(EXIT_IO)
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    }
    .exit_with(EXIT_IO)
}

fn load_graph(path: &Path) -> Result<ControlFlowGraph, Failure> {
    let spec = parse_graph(&read(path)?)
        .with_context(|| format!("cannot parse {}", path.display()))
        .exit_with(EXIT_PARSE)?;
    spec.build().map_err(|e| match e {
        GraphError::Invalid(report) => Failure(EXIT_VALIDATION, anyhow!("invalid graph {}:\n{report}", path.display())),
        other => Failure(EXIT_VALIDATION, other.into()),
    })
}

fn reuse_failure(e: ReuseError) -> Failure {
    match e {
        ReuseError::MissingDepth(_) => Failure(EXIT_CONFIG, e.into()),
        other => Failure(EXIT_VALIDATION, other.into()),
    }
}

#[derive(Serialize)]
struct Report<'a> {
    nodes: usize,
    strategy: &'static str,
    partitioned: bool,
    width: u64,
    depth: u64,
    requests: u64,
    bindings: &'a [qrecycle_core::reuse::ReuseBinding],
}

fn render(report: &Report<'_>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Text => {
            let mut s = format!(
                "nodes     {}\nstrategy  {}{}\nwidth     {}\ndepth     {}\nrequests  {}\nbindings  {}\n",
                report.nodes,
                report.strategy,
                if report.partitioned { " (partitioned)" } else { "" },
                report.width,
                report.depth,
                report.requests,
                report.bindings.len()
            );
            for b in report.bindings {
                s.push_str(&format!("  {} -> {}\n", b.from, b.to));
            }
            s
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let opts = args.solve.options();
    if args.partitioned && args.blocks.is_none() {
        return Err(Failure(EXIT_CONFIG, anyhow!("--partitioned needs a block tree (--blocks FILE)")));
    }
    let graph = load_graph(&args.graph)?;
    if opts.strategy == Strategy::DepthPreserving {
        check_depth_data(&graph).map_err(reuse_failure)?;
    }
    let schedule: Schedule = match &args.blocks {
        Some(path) => {
            let tree: BlockTree = from_json(&read(path)?)
                .with_context(|| format!("cannot parse {}", path.display()))
                .exit_with(EXIT_PARSE)?;
            solve_partitioned(&graph, &tree, &opts).map_err(|e| match e {
                PartitionError::Block {
                    source: ReuseError::MissingDepth(_),
                    ..
                } => Failure(EXIT_CONFIG, e.into()),
                other => Failure(EXIT_PARTITION, other.into()),
            })?
        }
        None => solve(&graph, &opts).map_err(reuse_failure)?,
    };

    let report = Report {
        nodes: graph.len(),
        strategy: opts.strategy.name(),
        partitioned: args.blocks.is_some(),
        width: schedule.width,
        depth: schedule.depth,
        requests: graph.total_requests(),
        bindings: &schedule.bindings,
    };
    let report = render(&report, args.report);
    let schedule = to_json(&schedule);
    match &args.out {
        Some(path) => {
            write(Some(path), &schedule)?;
            write(None, &report)
        }
        None => {
            write(None, &schedule)?;
            eprint!("{report}");
            Ok(())
        }
    }
}

fn generate(args: GenArgs) -> Result<(), Failure> {
    let family = match args.family {
        FamilyArg::FooChain { iterations, body, aux } => GraphFamily::FooChain { iterations, body, aux },
        FamilyArg::Serial { pairs } => GraphFamily::SerialAllocDealloc { pairs },
        FamilyArg::Fanout { branches, branch_len } => GraphFamily::FanoutFanin { branches, branch_len },
        FamilyArg::Random {
            nodes,
            density,
            allocating,
            releasing,
            seed,
        } => GraphFamily::RandomSparse {
            n: nodes,
            density,
            mix: RoleMix { allocating, releasing },
            seed,
        },
    };
    let generated = gen::generate(&family).exit_with(EXIT_CONFIG)?;
    write(args.out.as_deref(), &graph_to_json(&generated.graph))?;
    if let Some(path) = &args.blocks_out {
        let tree = generated
            .blocks
            .ok_or_else(|| Failure(EXIT_CONFIG, anyhow!("this family has no natural partition")))?;
        write(Some(path), &to_json(&tree))?;
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let family: BenchFamily = args.family.parse().exit_with(EXIT_CONFIG)?;
    let modes = match args.mode {
        ModeArg::Both => Modes::Both,
        ModeArg::Partitioned => Modes::PartitionedOnly,
        ModeArg::Unpartitioned => Modes::UnpartitionedOnly,
    };
    let rows = run_bench_modes(family, &args.sizes, args.repetitions, &args.solve.options(), modes)
        .exit_with(EXIT_CONFIG)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).exit_with(EXIT_IO)?;
    write(args.out.as_deref(), &String::from_utf8_lossy(&csv))?;
    for (partitioned, label) in [(true, "partitioned"), (false, "unpartitioned")] {
        if let Some(e) = fit_rows(&rows, partitioned) {
            eprintln!("{label} exponent {e:.3}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    min_width: u64,
    witness: Vec<u32>,
    heuristic_width: u64,
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let graph = load_graph(&args.graph)?;
    let (min_width, witness) = enumerate_min_width(&graph).exit_with(EXIT_CONFIG)?;
    let heuristic_width = solve(&graph, &SolveOptions::default()).map_err(reuse_failure)?.width;
    let report = OracleReport {
        min_width,
        witness: witness.order().iter().map(|v| v.0).collect(),
        heuristic_width,
    };
    let text = match args.report {
        ReportFormat::Json => to_json(&report),
        ReportFormat::Text => format!(
            "min width        {}\nwitness order    {:?}\nheuristic width  {}\n",
            report.min_width, report.witness, report.heuristic_width
        ),
    };
    write(None, &text)
}
