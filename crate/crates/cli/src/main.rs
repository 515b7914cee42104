//! Command-line interface: graph generation, gradient flows, landscape
//! surveys, twin reports, and synchronization certificates.
//!
//! Exit codes: 0 success, 1 error, 2 undecided (a flow that exhausted its
//! budget, or a certificate that was not granted).

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use syncscape::{
    parallel_survey, parse_edges, parse_parents, read_json, survey_csv, survey_enumerated_trees,
    to_json_pretty, trajectory_csv, write_output,
};
use syncscape_core::dynamics::{self, FlowOptions, TerminationReason};
use syncscape_core::energy::{self, PhaseState};
use syncscape_core::graph::Graph;
use syncscape_core::landscape::{classify, random_state, SurveyOptions};
use syncscape_core::skeleton::RootedForest;
use syncscape_core::twins::{classify_structural_at_state, structural_twins};
use syncscape_core::{certifier, Tolerances};

#[derive(Parser)]
#[command(
    name = "syncscape",
    about = "Energy-landscape analysis of the homogeneous Kuramoto model on graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph (and for qt-tree, its skeleton) as JSON.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Integrate the gradient flow from a state; write a trajectory CSV and
    /// the terminal state JSON.
    Flow(FlowArgs),
    /// Multistart landscape survey of a graph or of all small rooted trees.
    Survey(SurveyArgs),
    /// Check and emit a synchronization certificate for a stationary state.
    Certify(CertifyArgs),
    /// Report structural twins, classified geometrically at a state if one
    /// is given.
    Twins(TwinsArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Threshold graph of a binary insertion sequence.
    Threshold(GenThresholdArgs),
    /// Comparability closure of a rooted forest given as a parent array.
    QtTree(GenQtTreeArgs),
    /// Complete split graph (clique + independent set, all cross edges).
    Split(GenSplitArgs),
    /// Complete bipartite graph.
    Bipartite(GenBipartiteArgs),
    /// Graph from an explicit edge list.
    EdgeList(GenEdgeListArgs),
}

#[derive(Args)]
struct GenThresholdArgs {
    /// Binary insertion sequence, e.g. 10101011001.
    #[arg(long)]
    bits: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenQtTreeArgs {
    /// Parent array, e.g. "null,0,0,1" (null marks roots).
    #[arg(long)]
    parents: String,
    /// Output path for the graph JSON (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output path for the forest JSON; without it (and with no --out) a
    /// combined {"graph", "forest"} object goes to stdout.
    #[arg(long)]
    out_tree: Option<PathBuf>,
}

#[derive(Args)]
struct GenSplitArgs {
    /// Clique block size (>= 1).
    #[arg(long)]
    clique: usize,
    /// Independent block size.
    #[arg(long)]
    independent: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenBipartiteArgs {
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenEdgeListArgs {
    /// Vertex count.
    #[arg(long)]
    n: usize,
    /// Edges as "i-j,i-j,..." (may be empty).
    #[arg(long, default_value = "")]
    edges: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TolArgs {
    /// Gradient-norm stationarity tolerance.
    #[arg(long = "tol-grad", default_value_t = 1e-10)]
    tol_grad: f64,
    /// PSD slack on restricted Hessian eigenvalues.
    #[arg(long = "tol-eig", default_value_t = 1e-8)]
    tol_eig: f64,
    /// Synchronization deviation tolerance.
    #[arg(long = "tol-sync", default_value_t = 1e-6)]
    tol_sync: f64,
}

impl TolArgs {
    fn to_tolerances(&self) -> Result<Tolerances> {
        if self.tol_grad <= 0.0 || self.tol_eig <= 0.0 || self.tol_sync <= 0.0 {
            bail!("tolerances must be positive");
        }
        Ok(Tolerances {
            grad: self.tol_grad,
            eig: self.tol_eig,
            sync: self.tol_sync,
            ..Tolerances::default()
        })
    }
}

#[derive(Args)]
struct FlowArgs {
    /// Graph JSON file.
    graph: PathBuf,
    /// Initial state JSON file; mutually exclusive with --random.
    #[arg(long, conflicts_with = "random")]
    state: Option<PathBuf>,
    /// Draw the initial state uniformly from the seed instead.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e4)]
    max_time: f64,
    #[arg(long, default_value_t = 0.2)]
    dt: f64,
    /// Gradient norm at which the flow stops.
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Trajectory CSV output path (stdout if omitted and no state output).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Terminal state JSON output path.
    #[arg(long)]
    out_state: Option<PathBuf>,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Args)]
struct SurveyArgs {
    /// Graph JSON file; omit when using --enumerate-trees.
    graph: Option<PathBuf>,
    /// Survey all rooted trees on 1..=N nodes instead of a graph file.
    #[arg(long, conflicts_with = "graph")]
    enumerate_trees: Option<usize>,
    #[arg(long)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Report JSON output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV summary output path.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Saddle-escape step size.
    #[arg(long, default_value_t = 1e-2)]
    escape_step: f64,
    #[arg(long, default_value_t = 20)]
    max_escapes: usize,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Args)]
struct CertifyArgs {
    /// Graph JSON file.
    graph: PathBuf,
    /// Skeleton (forest JSON) whose comparability closure must be the graph.
    tree: PathBuf,
    /// State JSON file holding the stationary point.
    state: PathBuf,
    /// Certificate JSON output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Args)]
struct TwinsArgs {
    /// Graph JSON file.
    graph: PathBuf,
    /// Optional state JSON; twins are then classified geometrically.
    state: Option<PathBuf>,
    /// Tolerance for the geometric classification.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(cmd) => run_gen(cmd).map(|()| ExitCode::SUCCESS),
        Command::Flow(args) => run_flow(args),
        Command::Survey(args) => run_survey(args).map(|()| ExitCode::SUCCESS),
        Command::Certify(args) => run_certify(args),
        Command::Twins(args) => run_twins(args).map(|()| ExitCode::SUCCESS),
    }
}

fn run_gen(cmd: GenCommand) -> Result<()> {
    match cmd {
        GenCommand::Threshold(args) => {
            let g = Graph::threshold_from_sequence(&args.bits)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            write_output(args.out.as_deref(), &to_json_pretty(&g))
        }
        GenCommand::QtTree(args) => {
            let parents = parse_parents(&args.parents)?;
            let forest =
                RootedForest::from_parents(parents).map_err(|e| anyhow::anyhow!("{e}"))?;
            let graph = forest.comparability_closure();
            match (&args.out, &args.out_tree) {
                (None, None) => {
                    #[derive(serde::Serialize)]
                    struct Combined<'a> {
                        graph: &'a Graph,
                        forest: &'a RootedForest,
                    }
                    write_output(None, &to_json_pretty(&Combined { graph: &graph, forest: &forest }))
                }
                _ => {
                    write_output(args.out.as_deref(), &to_json_pretty(&graph))?;
                    if let Some(tree_path) = &args.out_tree {
                        write_output(Some(tree_path), &to_json_pretty(&forest))?;
                    }
                    Ok(())
                }
            }
        }
        GenCommand::Split(args) => {
            let g = Graph::complete_split(args.clique, args.independent)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            write_output(args.out.as_deref(), &to_json_pretty(&g))
        }
        GenCommand::Bipartite(args) => {
            let g = Graph::complete_bipartite(args.a, args.b)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            write_output(args.out.as_deref(), &to_json_pretty(&g))
        }
        GenCommand::EdgeList(args) => {
            let edges = parse_edges(&args.edges)?;
            let g = Graph::from_edge_list(args.n, &edges).map_err(|e| anyhow::anyhow!("{e}"))?;
            write_output(args.out.as_deref(), &to_json_pretty(&g))
        }
    }
}

fn run_flow(args: FlowArgs) -> Result<ExitCode> {
    let g: Graph = read_json(&args.graph)?;
    let s0 = match (&args.state, args.random) {
        (Some(path), false) => read_json::<PhaseState>(path)?,
        (None, true) => random_state(g.n(), args.seed, 0),
        (None, false) => bail!("provide --state FILE or --random"),
        (Some(_), true) => unreachable!("clap conflicts_with"),
    };
    if s0.len() != g.n() {
        bail!("state has {} angles but the graph has {} vertices", s0.len(), g.n());
    }
    let opts = FlowOptions {
        max_time: args.max_time,
        dt_initial: args.dt,
        grad_tol: args.grad_tol,
        max_steps: args.max_steps,
        record_every: args.record_every,
    };
    let tols = args.tols.to_tolerances()?;

    let traj = dynamics::integrate(&g, &s0, &opts).map_err(|e| anyhow::anyhow!("{e}"))?;
    let csv = trajectory_csv(&traj);
    if args.out_csv.is_some() || args.out_state.is_none() {
        write_output(args.out_csv.as_deref(), &csv)?;
    }

    // The emitted terminal state is the Newton-refined stationary point, so
    // it can be fed straight into `certify` and `twins`.
    let (verdict, refined) =
        dynamics::flow_to_verdict(&g, &s0, &opts, &tols).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(
        args.out_state.as_deref(),
        &to_json_pretty(&refined.canonicalized()),
    )?;
    eprintln!(
        "flow: {:?} after {} steps (t = {}), verdict {:?}, terminal gradient norm {:.3e}",
        traj.termination_reason,
        traj.steps,
        traj.time,
        verdict,
        energy::gradient_norm(&g, &refined).unwrap()
    );
    if traj.termination_reason == TerminationReason::Converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn run_survey(args: SurveyArgs) -> Result<()> {
    if args.starts == 0 {
        bail!("--starts must be at least 1");
    }
    let tols = args.tols.to_tolerances()?;
    if args.escape_step <= 0.0 {
        bail!("--escape-step must be positive");
    }
    let opts = SurveyOptions {
        tols,
        escape_step: args.escape_step,
        max_escapes: args.max_escapes,
        ..SurveyOptions::default()
    };

    let reports = match (&args.graph, args.enumerate_trees) {
        (Some(path), None) => {
            let g: Graph = read_json(path)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".to_string());
            vec![parallel_survey(&g, &id, args.starts, args.seed, &opts, args.workers)?]
        }
        (None, Some(max_nodes)) => {
            survey_enumerated_trees(max_nodes, args.starts, args.seed, &opts, args.workers)?
        }
        (None, None) => bail!("provide a graph file or --enumerate-trees N"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    for r in &reports {
        eprintln!(
            "survey {}: {}/{} sync, {} nonsync, {} saddle, {} undecided, {} failed ({:.2}s)",
            r.graph_id,
            r.counts.sosp_sync,
            r.n_starts,
            r.counts.sosp_nonsync,
            r.counts.strict_saddle,
            r.counts.undecided,
            r.counts.failed,
            r.wall_time_secs,
        );
    }

    let json = if reports.len() == 1 {
        to_json_pretty(&reports[0])
    } else {
        to_json_pretty(&reports)
    };
    write_output(args.out.as_deref(), &json)?;
    if let Some(csv_path) = &args.out_csv {
        write_output(Some(csv_path), &survey_csv(&reports))?;
    }
    Ok(())
}

fn run_certify(args: CertifyArgs) -> Result<ExitCode> {
    let g: Graph = read_json(&args.graph)?;
    let tree: RootedForest = read_json(&args.tree)?;
    let state: PhaseState = read_json(&args.state)?;
    let tols = args.tols.to_tolerances()?;
    let cert =
        certifier::certify(&g, &tree, &state, &tols).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_output(args.out.as_deref(), &to_json_pretty(&cert))?;
    if cert.is_certified() {
        eprintln!("certified_sync");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("not certified: {:?}", cert.overall);
        Ok(ExitCode::from(1))
    }
}

fn run_twins(args: TwinsArgs) -> Result<()> {
    let g: Graph = read_json(&args.graph)?;
    let report = match &args.state {
        None => structural_twins(&g),
        Some(path) => {
            let state: PhaseState = read_json(path)?;
            if state.len() != g.n() {
                bail!("state length {} does not match n = {}", state.len(), g.n());
            }
            // Classify at the state; the classification report also labels
            // the stationarity of the state for context.
            let c = classify(&g, &state, &Tolerances::default());
            eprintln!(
                "state verdict: {:?} (gradient norm {:.3e})",
                c.verdict, c.grad_norm
            );
            structural_twins(&g)
                .iter()
                .map(|t| classify_structural_at_state(&g, &state, t.a, t.b, args.tol))
                .collect()
        }
    };
    write_output(args.out.as_deref(), &to_json_pretty(&report))
}
