//! Command-line surface: one binary, subcommand per task.
//!
//! Exit codes: 0 success, 1 precondition error, 2 numerical
//! non-convergence, 3 I/O error, 64 usage error. Every run prints its
//! fully resolved configuration to stderr so results can be reproduced
//! from the log alone.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ohmlab_core::closedform::{ps_exact_moments, ps_resistance};
use ohmlab_core::graph::{Network, TerminalPair};
use ohmlab_core::influence::{
    check_efron_stein, check_energy_bound, check_fs_inequality, exhaustive_analysis_capped,
    InequalityCheck, Observable,
};
use ohmlab_core::linear::effective_resistance;
use ohmlab_core::pflow::p_resistance;
use ohmlab_core::stats::ReplicaStats;
use ohmlab_core::{Distribution, Environment, SeedSpec};
use serde::Deserialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::experiments::{
    run_averaged_influence, run_box_energy, run_left_right, run_p_scaling, run_point_to_point,
    run_shape, run_tail, Direction, ExperimentConfig, ExperimentKind, ExperimentReport,
};
use crate::fileio;
use crate::verify::run_verify;

#[derive(Parser)]
#[command(name = "ohmlab", version, about = "electric networks with random edge resistances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Effective resistance of a network under one environment
    Resist(ResistArgs),
    /// p-resistance by convex minimization over unit flows
    Pres(PresArgs),
    /// Exhaustive influence analysis over the two-point environment cube
    Enumerate(EnumerateArgs),
    /// Exact or Monte Carlo moments of the parallel-series network
    Psnet(PsnetArgs),
    /// Seeded Monte Carlo experiment campaigns
    Exp(ExpArgs),
    /// Run the full invariant suite at reduced scale
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Plain,
    Json,
    Csv,
}

#[derive(Args)]
pub struct GraphArgs {
    /// Network JSON file: {"vertices": N, "edges": [[u,v],...]}
    #[arg(long, value_name = "FILE", conflicts_with_all = ["grid", "ps"])]
    net: Option<PathBuf>,
    /// Lattice box of this side
    #[arg(long, conflicts_with = "ps")]
    grid: Option<usize>,
    /// Lattice dimension for --grid
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Parallel-series network with this many stages
    #[arg(long)]
    ps: Option<usize>,
}

impl GraphArgs {
    fn build(&self) -> Result<Network> {
        if let Some(path) = &self.net {
            return fileio::read_network(path);
        }
        if let Some(side) = self.grid {
            return Ok(Network::box_lattice(self.dim, side)?);
        }
        if let Some(n) = self.ps {
            return Ok(Network::parallel_series(n)?);
        }
        Err(CliError::Parse("no network given: use --net, --grid, or --ps".into()))
    }
}

#[derive(Args)]
pub struct TerminalArgs {
    /// Left-right terminals of a 2-d box (whole columns)
    #[arg(long)]
    left_right: bool,
    /// Source vertex (default 0)
    #[arg(long)]
    source: Option<usize>,
    /// Sink vertex (default: last vertex)
    #[arg(long)]
    sink: Option<usize>,
}

impl TerminalArgs {
    fn terminals(&self, net: &Network) -> Result<TerminalPair> {
        if self.left_right {
            return Ok(net.left_right_terminals()?);
        }
        let source = self.source.unwrap_or(0);
        let sink = self.sink.unwrap_or(net.vertex_count().saturating_sub(1));
        Ok(TerminalPair::singleton(source, sink)?)
    }
}

#[derive(Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Write output here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn seed_or_env(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("OHMLAB_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

#[derive(Args)]
pub struct ResistArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    terminals: TerminalArgs,
    /// Edge distribution: bernoulli:a,b | uniform:lo,hi | const:c
    #[arg(long)]
    dist: String,
    /// Master seed (default: $OHMLAB_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Stream index within the seed
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Export the sampled environment as CSV
    #[arg(long, value_name = "FILE")]
    env_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct PresArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    terminals: TerminalArgs,
    #[arg(long)]
    dist: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Energy exponent, in (1, 8]
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    terminals: TerminalArgs,
    /// Low resistance value
    #[arg(long)]
    a: f64,
    /// High resistance value
    #[arg(long)]
    b: f64,
    /// p-resistance observable instead of the linear one
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Edge cap for the 2^|E| enumeration
    #[arg(long, default_value_t = 20)]
    cap: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct PsnetArgs {
    /// Number of stages
    #[arg(long)]
    n: usize,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Exact binomial moments (default)
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Monte Carlo moments over sampled environments
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 10_000)]
    replicas: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct ExpArgs {
    /// point-to-point | left-right | tail | shape | p-scaling | box-energy | averaged-influence
    kind: ExperimentKind,
    /// TOML or JSON config file; flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated scale list: offsets |v|, grid sides, or averaging sides
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<u64>>,
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Box enlargement as a multiple of |v|
    #[arg(long)]
    buffer: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// axis | diagonal
    #[arg(long)]
    direction: Option<Direction>,
    /// Target offset |v| for tail, box-energy, and averaged-influence
    #[arg(long)]
    offset: Option<u64>,
    /// Tail thresholds t
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Resistance-ball levels t
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Sampled edges for averaged-influence
    #[arg(long)]
    edges: Option<usize>,
    /// Sampled boxes per replica for box-energy
    #[arg(long)]
    boxes: Option<u64>,
    /// Worker threads (output is identical for any count)
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Corrupt the flow-bound tolerance to prove the suite can fail
    #[arg(long, hide = true)]
    negative_control: bool,
    #[command(flatten)]
    output: OutputArgs,
}

/// Optional config file for `exp`; every field can be overridden by a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpFileConfig {
    dimension: Option<usize>,
    scales: Option<Vec<u64>>,
    dist: Option<String>,
    replicas: Option<u64>,
    seed: Option<u64>,
    buffer: Option<f64>,
    p: Option<f64>,
    tolerance: Option<f64>,
    direction: Option<Direction>,
    offset: Option<u64>,
    thresholds: Option<Vec<f64>>,
    levels: Option<Vec<f64>>,
    edges: Option<usize>,
    boxes: Option<u64>,
}

fn load_file_config(path: &Path) -> Result<ExpFileConfig> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("toml") {
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("config: {e}")))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("config: {e}")))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Resist(args) => run_resist(args),
        Command::Pres(args) => run_pres(args),
        Command::Enumerate(args) => run_enumerate(args),
        Command::Psnet(args) => run_psnet(args),
        Command::Exp(args) => run_exp(args),
        Command::Verify(args) => run_verify_cmd(args),
    }
}

fn echo_config(command: &str, value: serde_json::Value) {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), command.into());
    if let serde_json::Value::Object(map) = value {
        doc.extend(map);
    }
    eprintln!("resolved-config: {}", serde_json::Value::Object(doc));
}

fn run_resist(args: ResistArgs) -> Result<()> {
    let net = args.graph.build()?;
    let terminals = args.terminals.terminals(&net)?;
    let dist = fileio::parse_distribution(&args.dist)?;
    let seed = seed_or_env(args.seed);
    echo_config(
        "resist",
        json!({
            "dist": fileio::distribution_to_string(&dist),
            "seed": seed, "stream": args.stream, "tol": args.tol,
            "vertices": net.vertex_count(), "edges": net.edge_count(),
            "sources": terminals.sources(), "sinks": terminals.sinks(),
        }),
    );
    let env = Environment::sample(&net, dist, SeedSpec::new(seed, args.stream));
    if let Some(path) = &args.env_out {
        std::fs::write(path, fileio::environment_to_csv(&env))?;
    }
    let res = effective_resistance(&net, &env, &terminals, args.tol)?;
    let content = match args.output.format {
        Format::Plain => format!("{}\n", res.value),
        Format::Json => format!(
            "{}\n",
            json!({ "value": res.value, "iterations": res.iterations, "residual": res.residual })
        ),
        Format::Csv => fileio::flow_to_csv(&res.flow.theta),
    };
    fileio::emit(args.output.out.as_deref(), &content)
}

fn run_pres(args: PresArgs) -> Result<()> {
    let net = args.graph.build()?;
    let terminals = args.terminals.terminals(&net)?;
    let dist = fileio::parse_distribution(&args.dist)?;
    let seed = seed_or_env(args.seed);
    echo_config(
        "pres",
        json!({
            "dist": fileio::distribution_to_string(&dist),
            "seed": seed, "stream": args.stream, "p": args.p,
            "tol": args.tol, "max_iter": args.max_iter,
        }),
    );
    let env = Environment::sample(&net, dist, SeedSpec::new(seed, args.stream));
    let res = p_resistance(&net, &env, &terminals, args.p, args.tol, args.max_iter)?;
    if !res.converged {
        return Err(CliError::Core(ohmlab_core::Error::NonConvergence {
            iterations: res.iterations,
            residual: res.flow.node_law_residual,
        }));
    }
    let content = match args.output.format {
        Format::Plain => format!("{}\n", res.value),
        Format::Json => format!(
            "{}\n",
            json!({
                "value": res.value, "iterations": res.iterations,
                "residual": res.flow.node_law_residual,
                "converged": res.converged, "p": res.p,
            })
        ),
        Format::Csv => fileio::flow_to_csv(&res.flow.theta),
    };
    fileio::emit(args.output.out.as_deref(), &content)
}

fn inequality_json(c: &InequalityCheck) -> serde_json::Value {
    json!({ "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds, "vacuous": c.vacuous })
}

fn run_enumerate(args: EnumerateArgs) -> Result<()> {
    let net = args.graph.build()?;
    let observable = if args.terminals.left_right {
        let coords = net.coords().ok_or(ohmlab_core::Error::MissingCoordinates)?;
        let side = coords.iter().map(|c| c[0]).max().unwrap_or(0) as usize;
        Observable::LeftRight { side }
    } else {
        let source = args.terminals.source.unwrap_or(0);
        let sink = args.terminals.sink.unwrap_or(net.vertex_count().saturating_sub(1));
        match args.p {
            Some(p) => Observable::PResistance { source, sink, p },
            None => Observable::PointToPoint { source, sink },
        }
    };
    echo_config(
        "enumerate",
        json!({
            "a": args.a, "b": args.b, "tol": args.tol, "cap": args.cap,
            "edges": net.edge_count(),
        }),
    );
    let report = exhaustive_analysis_capped(&net, &observable, args.a, args.b, args.tol, args.cap)?;
    let content = match args.output.format {
        Format::Csv => {
            let mut out = String::from("edge_id,l1,l2sq\n");
            for e in 0..report.per_edge_l1.len() {
                out.push_str(&format!("{e},{},{}\n", report.per_edge_l1[e], report.per_edge_l2sq[e]));
            }
            out
        }
        _ => {
            let es = check_efron_stein(&report);
            let fs = check_fs_inequality(&report)?;
            let eb = check_energy_bound(&report, args.a, args.b);
            format!(
                "{}\n",
                serde_json::to_string_pretty(&json!({
                    "variance": report.variance,
                    "mean": report.mean,
                    "per_edge_l1": report.per_edge_l1,
                    "per_edge_l2sq": report.per_edge_l2sq,
                    "sum_l1_sq": report.sum_l1_sq,
                    "sum_l2sq": report.sum_l2sq,
                    "exact": report.exact,
                    "replicas": report.replicas,
                    "efron_stein": inequality_json(&es),
                    "log_weighted": inequality_json(&fs),
                    "energy_bound": inequality_json(&eb),
                }))
                .expect("json")
            )
        }
    };
    fileio::emit(args.output.out.as_deref(), &content)
}

fn run_psnet(args: PsnetArgs) -> Result<()> {
    let mc = args.mc;
    let seed = seed_or_env(args.seed);
    echo_config(
        "psnet",
        json!({
            "n": args.n, "a": args.a, "b": args.b,
            "mode": if mc { "mc" } else { "exact" },
            "replicas": if mc { Some(args.replicas) } else { None },
            "seed": seed,
        }),
    );
    let (mean, variance, extra) = if mc {
        if args.replicas < 2 {
            return Err(CliError::Parse("--replicas must be at least 2".into()));
        }
        let net = Network::parallel_series(args.n)?;
        let dist = Distribution::bernoulli(args.a, args.b)?;
        let mut stats = ReplicaStats::new();
        for k in 0..args.replicas {
            let env = Environment::sample(&net, dist, SeedSpec::new(seed, k));
            stats.push(ps_resistance(&env)?);
        }
        (
            stats.mean(),
            stats.variance(),
            json!({ "replicas": stats.count(), "mean_se": stats.standard_error() }),
        )
    } else {
        let m = ps_exact_moments(args.n, args.a, args.b)?;
        (m.mean, m.variance, json!({ "replicas": null }))
    };
    let content = match args.output.format {
        Format::Json => {
            let mut doc = json!({ "mean": mean, "variance": variance });
            if let (Some(obj), serde_json::Value::Object(extra)) = (doc.as_object_mut(), extra) {
                obj.extend(extra);
            }
            format!("{doc}\n")
        }
        _ => format!("mean {mean}\nvariance {variance}\n"),
    };
    fileio::emit(args.output.out.as_deref(), &content)
}

fn run_exp(args: ExpArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => ExpFileConfig::default(),
    };
    let dist_spec = args
        .dist
        .or(file.dist)
        .ok_or_else(|| CliError::Parse("experiment needs --dist (or a config file)".into()))?;
    let mut cfg = ExperimentConfig::new(args.kind, fileio::parse_distribution(&dist_spec)?);
    if let Some(d) = args.dim.or(file.dimension) {
        cfg.dimension = d;
    }
    if let Some(s) = args.scales.or(file.scales) {
        cfg.scales = s;
    }
    if let Some(r) = args.replicas.or(file.replicas) {
        cfg.replicas = r;
    }
    cfg.master_seed = seed_or_env(args.seed.or(file.seed));
    if let Some(b) = args.buffer.or(file.buffer) {
        cfg.buffer_factor = b;
    }
    cfg.p = args.p.or(file.p);
    if let Some(t) = args.tol.or(file.tolerance) {
        cfg.tolerance = t;
    }
    if let Some(d) = args.direction.or(file.direction) {
        cfg.direction = d;
    }
    let offset = args.offset.or(file.offset);
    let thresholds = args.thresholds.or(file.thresholds);
    let levels = args.levels.or(file.levels);
    let edges = args.edges.or(file.edges).unwrap_or(4);
    let boxes = args.boxes.or(file.boxes).unwrap_or(4);

    let offset_for = |what: &str| {
        offset.ok_or_else(|| CliError::Parse(format!("{what} needs --offset")))
    };

    let compute = || -> Result<ExperimentReport> {
        match args.kind {
            ExperimentKind::PointToPoint => {
                Ok(ExperimentReport::Scaling { rows: run_point_to_point(&cfg)? })
            }
            ExperimentKind::LeftRight => {
                Ok(ExperimentReport::Scaling { rows: run_left_right(&cfg)? })
            }
            ExperimentKind::PScaling => Ok(ExperimentReport::Scaling { rows: run_p_scaling(&cfg)? }),
            ExperimentKind::Tail => {
                let thresholds = thresholds
                    .clone()
                    .ok_or_else(|| CliError::Parse("tail needs --thresholds".into()))?;
                Ok(ExperimentReport::Tail { rows: run_tail(&cfg, offset_for("tail")?, &thresholds)? })
            }
            ExperimentKind::Shape => {
                let levels = levels
                    .clone()
                    .ok_or_else(|| CliError::Parse("shape needs --levels".into()))?;
                Ok(ExperimentReport::Shape(run_shape(&cfg, &levels)?))
            }
            ExperimentKind::BoxEnergy => {
                let ms = cfg.scales.clone();
                Ok(ExperimentReport::BoxEnergy {
                    rows: run_box_energy(&cfg, offset_for("box-energy")?, &ms, boxes)?,
                })
            }
            ExperimentKind::AveragedInfluence => {
                let ms = cfg.scales.clone();
                Ok(ExperimentReport::AveragedInfluence {
                    rows: run_averaged_influence(&cfg, offset_for("averaged-influence")?, &ms, edges)?,
                })
            }
        }
    };

    echo_config(
        "exp",
        json!({
            "config": &cfg,
            "offset": offset, "thresholds": thresholds, "levels": levels,
            "edges": edges, "boxes": boxes, "threads": args.threads,
        }),
    );

    let report = match args.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Parse(e.to_string()))?;
            pool.install(compute)?
        }
        None => compute()?,
    };

    let content = match args.output.format {
        Format::Json => format!("{}\n", fileio::report_to_json(&cfg, &report)),
        _ => report.to_csv(),
    };
    fileio::emit(args.output.out.as_deref(), &content)?;
    // the JSON mirror always sits next to a CSV written to disk
    if args.output.format != Format::Json {
        if let Some(path) = &args.output.out {
            let mirror = path.with_extension("json");
            std::fs::write(mirror, format!("{}\n", fileio::report_to_json(&cfg, &report)))?;
        }
    }
    Ok(())
}

fn run_verify_cmd(args: VerifyArgs) -> Result<()> {
    let report = run_verify(args.negative_control);
    let content = match args.output.format {
        Format::Plain | Format::Json => {
            format!("{}\n", serde_json::to_string_pretty(&report).expect("json"))
        }
        Format::Csv => {
            let mut out = String::from("check,pass,detail\n");
            for c in &report.checks {
                out.push_str(&format!("{},{},{}\n", c.name, c.pass, c.detail.replace(',', ";")));
            }
            out
        }
    };
    fileio::emit(args.output.out.as_deref(), &content)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(report.checks.iter().filter(|c| !c.pass).count()))
    }
}
