use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rbrcd::bench::{self, BenchOptions, Suite};
use rbrcd::solver::{RestartSummary, DEFAULT_SIGMA};
use rbrcd::{detect, generate_dcsbm, load_edge_list, Graph, MetricsReport, Partition, Recovery, SolverConfig, SynthConfig};

/// Bump when a field of a JSON report changes meaning or disappears.
const SCHEMA_VERSION: u32 = 1;

/// Graphs with at least this many nodes default to `p = min(5, k)`.
const LARGE_GRAPH_NODES: usize = 10_000;

#[derive(Parser)]
#[command(name = "rbrcd", version, about = "Community detection by sparse low-rank modularity relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect communities in an edge-list graph.
    Detect(DetectArgs),
    /// Sample a degree-corrected stochastic block model graph.
    Synth(SynthArgs),
    /// Score a labelling of a graph.
    Eval(EvalArgs),
    /// Run a benchmark suite and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Args, Serialize)]
struct GraphArgs {
    /// Whitespace-separated edge list; `#` starts a comment line.
    #[arg(long)]
    graph: PathBuf,
    /// Treat repeated edges as an error instead of merging them.
    #[arg(long)]
    no_dedup: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<Graph> {
        let g = load_edge_list(&self.graph, !self.no_dedup)?;
        log::info!(
            "loaded {}: n = {}, |E| = {}, isolated = {}",
            self.graph.display(),
            g.n(),
            g.num_edges(),
            g.isolated_nodes()
        );
        Ok(g)
    }
}

#[derive(Args, Serialize)]
struct DetectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    /// Number of columns of the factor (upper bound on communities).
    #[arg(long)]
    k: usize,
    /// Nonzeros per row; defaults to k, or min(5, k) on large graphs.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Round the factor in place every this many sweeps (0 = never);
    /// defaults to 5 with several threads and 0 otherwise.
    #[arg(long)]
    rounding_every: Option<usize>,
    /// Sequential stopping threshold on the squared step length.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = Recovery::Rounding)]
    recover: Recovery,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Planted labels; adds misclassification to the report.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// JSON run record.
    #[arg(long)]
    out: Option<PathBuf>,
    /// "node_id label" lines for the chosen partition.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    k: usize,
    /// Nodes per community.
    #[arg(long)]
    m: usize,
    /// Within-community base probability.
    #[arg(long)]
    q: f64,
    /// Pareto shape of the degree parameters (> 1).
    #[arg(long, required_unless_present = "sbm")]
    alpha: Option<f64>,
    /// Between/within probability ratio.
    #[arg(long, default_value_t = 0.3)]
    ratio: f64,
    /// Plain block model: every degree parameter is 1.
    #[arg(long)]
    sbm: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes `<out>.edges` and `<out>.truth`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// table2, table3, shape-sweep, k-sweep or p-sweep.
    #[arg(long)]
    suite: Suite,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Graph for the k- and p-sweeps instead of the built-in synthetic one.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GraphStats {
    n: usize,
    edges: usize,
    isolated: usize,
}

#[derive(Serialize)]
struct Timing {
    load_s: f64,
    solve_s: f64,
    write_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    schema_version: u32,
    command: &'static str,
    args: &'a DetectArgs,
    solver: &'a SolverConfig,
    graph: GraphStats,
    restarts: &'a [RestartSummary],
    best_restart: usize,
    labels_path: Option<&'a Path>,
    report: &'a MetricsReport,
    seed: u64,
    timing: Timing,
}

#[derive(Serialize)]
struct EvalRecord<'a> {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let started = Instant::now();
    let g = args.graph.load()?;
    let truth = args.truth.as_ref().map(|p| Partition::read_labels(p, &g)).transpose()?;
    let load_s = started.elapsed().as_secs_f64();

    let default_p = if g.n() >= LARGE_GRAPH_NODES { args.k.min(5) } else { args.k };
    let cfg = SolverConfig {
        p: args.p.unwrap_or(default_p),
        sigma: args.sigma,
        max_sweeps: args.sweeps,
        restarts: args.restarts,
        rounding_every: args.rounding_every.unwrap_or(if args.threads > 1 { 5 } else { 0 }),
        threads: args.threads,
        seed: args.seed,
        tol: args.tol,
        recovery: args.recover,
        ..SolverConfig::new(args.k)
    };
    let det = detect(&g, &cfg)?;
    for r in &det.restarts {
        log::info!(
            "restart {}: f {:.6} -> {:.6} in {} sweeps, Q = {:.6}",
            r.restart,
            r.objective_initial,
            r.objective_final,
            r.sweeps,
            r.modularity
        );
    }
    let solve_s = det.report.wall_time_s;
    let mut report = MetricsReport::evaluate(&g, &det.partition, truth.as_ref())?;
    report.wall_time_s = solve_s;

    let write_started = Instant::now();
    if let Some(path) = &args.labels_out {
        let mut w = create(path)?;
        det.partition.write_labels(&g, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.out {
        let record = RunRecord {
            schema_version: SCHEMA_VERSION,
            command: "detect",
            args,
            solver: &cfg,
            graph: GraphStats {
                n: g.n(),
                edges: g.num_edges(),
                isolated: g.isolated_nodes(),
            },
            restarts: &det.restarts,
            best_restart: det.best_restart,
            labels_path: args.labels_out.as_deref(),
            report: &report,
            seed: args.seed,
            timing: Timing {
                load_s,
                solve_s,
                write_s: write_started.elapsed().as_secs_f64(),
                total_s: started.elapsed().as_secs_f64(),
            },
        };
        write_json(path, &record)?;
    }

    print!("Q = {:.6}  k0 = {}  time = {:.3}s", report.modularity, report.k0, solve_s);
    if let Some(err) = report.err {
        print!("  err = {:.4}%", 100.0 * err);
    }
    println!();
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        ratio: args.ratio,
        degree_corrected: !args.sbm,
        ..SynthConfig::new(args.k, args.m, args.q, args.alpha.unwrap_or(f64::NAN), args.seed)
    };
    let (g, truth) = generate_dcsbm(&cfg)?;
    let with_ext = |ext: &str| {
        let mut s = args.out.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    let mut w = create(&with_ext(".edges"))?;
    g.write_edge_list(&mut w)?;
    w.flush()?;
    let mut w = create(&with_ext(".truth"))?;
    truth.partition().write_labels(&g, &mut w)?;
    w.flush()?;
    println!("n = {}  |E| = {}  isolated = {}", g.n(), g.num_edges(), g.isolated_nodes());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let g = args.graph.load()?;
    let part = Partition::read_labels(&args.labels, &g)?;
    let truth = args.truth.as_ref().map(|p| Partition::read_labels(p, &g)).transpose()?;
    let report = MetricsReport::evaluate(&g, &part, truth.as_ref())?;
    let record = EvalRecord {
        schema_version: SCHEMA_VERSION,
        command: "eval",
        report: &report,
    };
    if let Some(path) = &args.out {
        write_json(path, &record)?;
    }
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.graph.is_some() && !matches!(args.suite, Suite::KSweep | Suite::PSweep) {
        bail!("--graph only applies to the k-sweep and p-sweep suites");
    }
    let graph = args.graph.as_ref().map(|p| load_edge_list(p, true)).transpose()?;
    let opts = BenchOptions {
        trials: args.trials,
        seed: args.seed,
        restarts: args.restarts,
        sigma: args.sigma,
        max_sweeps: args.sweeps,
        threads: args.threads,
        ..BenchOptions::default()
    };
    let table = bench::run_suite(args.suite, &opts, graph.as_ref())?;
    match &args.out {
        Some(path) => table.write_csv(create(path)?)?,
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 from inside `parse`.
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
