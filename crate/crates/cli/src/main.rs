//! `tristream`: triangle-count estimation over edge-list streams.
//!
//! Exit codes: 0 on success, 1 for usage and parameter errors, 2 for I/O and
//! input parse errors.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tristream_core::amplification::{median_of_means, replication_plan};
use tristream_core::estimators::{check_bounds, run_once, select_params, Algorithm};
use tristream_core::generators::{reorder, Family, GeneratorSpec, OrderPolicy, TriangleProfile};
use tristream_core::harness::{run_bench, summarize, write_csv, AlgoSummary, BenchConfig};
use tristream_core::{graph_stats, load_edge_list, materialize, EdgeStream, GraphStats, LoadMode};

#[derive(Parser, Debug)]
#[command(name = "tristream", version, about = "Streaming triangle-count estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact statistics of an edge list.
    Stats(StatsArgs),
    /// One estimate, or a median-of-means estimate with --auto.
    Estimate(EstimateArgs),
    /// Repeated trials of one or more estimators.
    Bench(BenchArgs),
    /// Write a synthetic graph as an edge list.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Edge-list file.
    #[arg(long, value_name = "PATH", conflicts_with = "stdin")]
    input: Option<PathBuf>,
    /// Read the edge list from standard input.
    #[arg(long)]
    stdin: bool,
    /// Drop self-loops and duplicate edges instead of rejecting them.
    #[arg(long)]
    permissive: bool,
}

#[derive(Args, Debug)]
struct StreamArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Order::Given)]
    order: Order,
    /// Emit JSON (the only report format; accepted for symmetry).
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    Given,
    Random,
    Reverse,
}

impl From<Order> for OrderPolicy {
    fn from(o: Order) -> Self {
        match o {
            Order::Given => OrderPolicy::Given,
            Order::Random => OrderPolicy::Random,
            Order::Reverse => OrderPolicy::Reverse,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AlgoName {
    Opt,
    Wedge,
    Vertex,
    Tkmf,
    Colorful,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone, Copy)]
struct AlgoParams {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    stream: StreamArgs,
    #[arg(long, value_enum, default_value_t = AlgoName::Opt)]
    algo: AlgoName,
    #[command(flatten)]
    params: AlgoParams,
    /// Choose p and q from bounds and amplify with median of means.
    #[arg(long, requires_all = ["t_lower", "de_upper", "dv_upper"])]
    auto: bool,
    #[arg(long)]
    t_lower: Option<u64>,
    #[arg(long)]
    de_upper: Option<u64>,
    #[arg(long)]
    dv_upper: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    stream: StreamArgs,
    /// Comma-separated algorithms.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "opt")]
    algos: Vec<AlgoName>,
    #[command(flatten)]
    params: AlgoParams,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Per-trial CSV records.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Skip the exact count (no exact_T, rel_error or variance bound).
    #[arg(long)]
    no_exact: bool,
    /// Record per-trial wall-clock time; output is then not reproducible.
    #[arg(long)]
    timing: bool,
    /// Worker threads for trials (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyName {
    Complete,
    Book,
    Friendship,
    Disjoint,
    Er,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Vertex count (complete, er).
    #[arg(long)]
    n: Option<u64>,
    /// Edge count (er).
    #[arg(long)]
    m: Option<u64>,
    /// Pages (book) or blades (friendship).
    #[arg(long)]
    k: Option<u64>,
    /// Triangle count (disjoint).
    #[arg(long)]
    t: Option<u64>,
    /// Triangle-free star edges appended to the graph.
    #[arg(long, default_value_t = 0)]
    pad: u64,
    #[command(flatten)]
    stream: StreamArgs,
    /// Output file; standard output when absent.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(tristream_core::Error),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(tristream_core::Error::Parameter(_)) => 1,
            CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
            CliError::Io(e) => e.fmt(f),
        }
    }
}

impl From<tristream_core::Error> for CliError {
    fn from(e: tristream_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Stats(a) => cmd_stats(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tristream: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_stream(input: &InputArgs) -> CliResult<EdgeStream> {
    let mut bytes = Vec::new();
    match (&input.input, input.stdin) {
        (Some(path), _) => {
            File::open(path)
                .and_then(|mut f| f.read_to_end(&mut bytes))
                .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        }
        (None, true) => {
            io::stdin().lock().read_to_end(&mut bytes)?;
        }
        (None, false) => return Err(usage("an input is required: --input PATH or --stdin")),
    }
    let mode = if input.permissive { LoadMode::Permissive } else { LoadMode::Strict };
    Ok(load_edge_list(&bytes, mode)?)
}

fn ordered(stream: EdgeStream, args: &StreamArgs) -> EdgeStream {
    reorder(stream.into_edges(), args.order.into(), args.seed)
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> CliResult<()> {
    let stream = read_stream(&args.input)?;
    print_json(&graph_stats(&materialize(&stream)?))
}

fn algorithm(name: AlgoName, params: AlgoParams) -> CliResult<Algorithm> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| usage(format!("--algo {} needs --{flag}", name.to_possible_value().unwrap().get_name())))
    };
    let algo = match name {
        AlgoName::Opt => Algorithm::Opt {
            p: need(params.p, "p")?,
            q: need(params.q, "q")?,
        },
        AlgoName::Wedge => Algorithm::Wedge { q: need(params.q, "q")? },
        AlgoName::Vertex => Algorithm::Vertex { p: need(params.p, "p")? },
        AlgoName::Tkmf => Algorithm::Tkmf { q: need(params.q, "q")? },
        AlgoName::Colorful => Algorithm::Colorful {
            k: params.k.ok_or_else(|| usage("--algo colorful needs --k"))?,
        },
    };
    algo.validate()?;
    Ok(algo)
}

#[derive(Serialize)]
struct AutoReport {
    algo: &'static str,
    estimate: f64,
    p: f64,
    q: f64,
    eps: f64,
    delta: f64,
    copies_per_mean: usize,
    means_count: usize,
    means: Vec<f64>,
    t_lower: u64,
    de_upper: u64,
    dv_upper: u64,
    stored_max_total: u64,
    edges_seen: u64,
    seed: u64,
}

fn cmd_estimate(args: EstimateArgs) -> CliResult<()> {
    if args.auto {
        if args.algo != AlgoName::Opt {
            return Err(usage("--auto only applies to --algo opt"));
        }
        if args.params.p.is_some() || args.params.q.is_some() {
            return Err(usage("--auto chooses p and q; do not pass --p or --q"));
        }
        let (t, de, dv) = (args.t_lower.unwrap(), args.de_upper.unwrap(), args.dv_upper.unwrap());
        check_bounds(t, de, dv)?;
        let (p, q) = select_params(t, de, dv)?;
        let plan = replication_plan(args.eps, args.delta)?;
        let stream = ordered(read_stream(&args.input)?, &args.stream);
        let amp = median_of_means(stream.iter(), p, q, &plan, args.stream.seed)?;
        return print_json(&AutoReport {
            algo: "opt",
            estimate: amp.estimate,
            p,
            q,
            eps: args.eps,
            delta: args.delta,
            copies_per_mean: amp.copies_per_mean,
            means_count: amp.means_count,
            means: amp.means,
            t_lower: t,
            de_upper: de,
            dv_upper: dv,
            stored_max_total: amp.stored_max_total,
            edges_seen: amp.edges_seen,
            seed: amp.seed,
        });
    }
    let algo = algorithm(args.algo, args.params)?;
    let stream = ordered(read_stream(&args.input)?, &args.stream);
    print_json(&run_once(&algo, args.stream.seed, stream.iter())?)
}

#[derive(Serialize)]
struct BenchSummary {
    trials: u64,
    seed: u64,
    #[serde(rename = "exact_T")]
    exact_t: Option<u64>,
    stats: Option<GraphStats>,
    algos: Vec<AlgoSummary>,
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    if args.algos.is_empty() {
        return Err(usage("--algos must name at least one algorithm"));
    }
    let mut algos = Vec::new();
    for &name in &args.algos {
        let algo = algorithm(name, args.params)?;
        if !algos.contains(&algo) {
            algos.push(algo);
        }
    }
    let config = BenchConfig {
        algos,
        trials: args.trials,
        master_seed: args.stream.seed,
        timing: args.timing,
    };
    let stream = ordered(read_stream(&args.input)?, &args.stream);
    let stats = if args.no_exact { None } else { Some(graph_stats(&materialize(&stream)?)) };
    let exact_t = stats.as_ref().map(|s| s.triangles);

    let records = match args.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(e.to_string()))?
            .install(|| run_bench(stream.edges(), exact_t, &config))?,
        None => run_bench(stream.edges(), exact_t, &config)?,
    };
    if let Some(path) = &args.csv {
        let file = File::create(path)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        write_csv(&records, &mut out)?;
        out.flush()?;
    }
    let algos = summarize(&records, &config.algos, stats.as_ref());
    print_json(&BenchSummary {
        trials: args.trials,
        seed: args.stream.seed,
        exact_t,
        stats,
        algos,
    })
}

#[derive(Serialize)]
struct GenReport {
    family: &'static str,
    pad: u64,
    seed: u64,
    n: u64,
    m: u64,
    /// Analytic values before padding; absent for random graphs.
    profile: Option<TriangleProfile>,
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let need = |v: Option<u64>, flag: &str| {
        v.ok_or_else(|| usage(format!("--family {} needs --{flag}", args.family.to_possible_value().unwrap().get_name())))
    };
    let family = match args.family {
        FamilyName::Complete => Family::Complete { n: need(args.n, "n")? },
        FamilyName::Book => Family::Book { k: need(args.k, "k")? },
        FamilyName::Friendship => Family::Friendship { k: need(args.k, "k")? },
        FamilyName::Disjoint => Family::Disjoint { t: need(args.t, "t")? },
        FamilyName::Er => Family::Er {
            n: need(args.n, "n")?,
            m: need(args.m, "m")?,
        },
    };
    let spec = GeneratorSpec {
        family,
        pad_edges: args.pad,
        seed: args.stream.seed,
    };
    let graph = spec.build()?;
    let stream = reorder(graph.edges().collect(), args.stream.order.into(), args.stream.seed);

    let mut text = String::with_capacity(stream.len() * 12);
    for e in stream.iter() {
        text.push_str(&e.to_string());
        text.push('\n');
    }
    let report = GenReport {
        family: family.name(),
        pad: args.pad,
        seed: args.stream.seed,
        n: graph.n() as u64,
        m: graph.m() as u64,
        profile: family.profile(),
    };
    let json = serde_json::to_string(&report).map_err(io::Error::from)?;
    match &args.output {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            println!("{json}");
        }
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            eprintln!("{json}");
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
