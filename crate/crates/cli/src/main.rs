//! `packetsim`: run single simulations, generate workloads, sweep the
//! scale-ratio grid and analyze sweep results.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use packetsim_core::policy::{PacketConfig, PolicySpec};
use packetsim_core::sweep::{
    default_workloads, emit_plot_series, plateau_table, read_results, write_results, GroupBy, Metric, SweepConfig,
    SweepPolicy, DEFAULT_REL_TOL,
};
use packetsim_core::workload::{
    generate_workload, offered_load, read_trace, resolve_nodes, set_initialization_proportion, write_trace,
    WorkloadHeader, TRACE_FORMAT_VERSION,
};
use packetsim_core::{
    compute_metrics, run_simulation, run_sweep, secs_to_micros, GeneratorConfig, Homogeneity, WaitEndpoint,
};

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "packetsim", version, about = "Group-based HPC scheduling simulator")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and print its metrics.
    Simulate(SimulateArgs),
    /// Write a synthetic workload trace.
    Generate(GenerateArgs),
    /// Run the experiment grid and write results.csv.
    Sweep(SweepArgs),
    /// Plateau thresholds and plot series from a results file.
    Analyze(AnalyzeArgs),
}

/// Generator settings shared by `simulate` and `generate`.
#[derive(Debug, Args)]
struct GeneratorArgs {
    /// Number of jobs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Offered load to calibrate to, in (0, 1).
    #[arg(long)]
    load: Option<f64>,
    /// Number of job types.
    #[arg(long)]
    types: Option<u32>,
    /// Submission span in days.
    #[arg(long)]
    span_days: Option<f64>,
    /// Narrow the runtime distribution.
    #[arg(long)]
    homogeneous: bool,
    /// Full-scale defaults: 5000 jobs over four days.
    #[arg(long)]
    paper_scale: bool,
}

impl GeneratorArgs {
    fn resolve(&self, file: Option<&GeneratorConfig>, nodes: Option<u32>, seed: Option<u64>) -> GeneratorConfig {
        let mut g = match (file, self.paper_scale) {
            (_, true) => GeneratorConfig::default(),
            (Some(g), false) => g.clone(),
            (None, false) => GeneratorConfig::desk(),
        };
        if let Some(n) = self.jobs {
            g.n_jobs = n;
        }
        if let Some(l) = self.load {
            g.target_load = l;
        }
        if let Some(h) = self.types {
            g.h_types = h;
        }
        if let Some(d) = self.span_days {
            g.span = secs_to_micros(d * 86_400.0);
        }
        if self.homogeneous {
            g.homogeneity = Homogeneity::Homogeneous;
        }
        if let Some(m) = nodes {
            g.nodes = m;
        }
        if let Some(s) = seed {
            g.seed = s;
        }
        g
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Trace file to replay; without it a workload is generated.
    #[arg(long)]
    workload: Option<PathBuf>,
    /// packet, fcfs or easy.
    #[arg(long)]
    policy: Option<String>,
    /// Scale ratio for the packet policy.
    #[arg(long)]
    k: Option<f64>,
    /// Initialization proportion S in (0, 1).
    #[arg(long = "init-proportion")]
    init_proportion: Option<f64>,
    /// Cluster size; overrides the trace header.
    #[arg(long)]
    nodes: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where a job's wait ends: job (its own start) or group (group dispatch).
    #[arg(long = "wait-endpoint")]
    wait_endpoint: Option<WaitEndpoint>,
    /// Write the per-job trace CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Output trace file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Cluster size the load is calibrated for.
    #[arg(long)]
    nodes: Option<u32>,
    /// Also set a common init time for this initialization proportion.
    #[arg(long = "init-proportion")]
    init_proportion: Option<f64>,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Output directory for results.csv and timings.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per CPU).
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Comma-separated policies (packet, fcfs, easy).
    #[arg(long, value_delimiter = ',')]
    policy: Vec<SweepPolicy>,
    /// Comma-separated scale ratios, replacing the k grid.
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    /// Comma-separated initialization proportions, replacing the S grid.
    #[arg(long = "init-proportion", value_delimiter = ',')]
    init_proportion: Vec<f64>,
    #[arg(long = "wait-endpoint")]
    wait_endpoint: Option<WaitEndpoint>,
    /// Use the full-scale reference workloads (5000 jobs, four days).
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// results.csv written by `sweep`.
    results: PathBuf,
    /// Metric for the plateau table and plot series.
    #[arg(long, default_value = "avg_queue_time")]
    metric: Metric,
    /// Relative plateau tolerance.
    #[arg(long = "rel-tol", default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Write one plot-ready CSV per (workload, policy, S) here.
    #[arg(long = "plot-dir")]
    plot_dir: Option<PathBuf>,
    /// Series layout: s (one file per S under each workload) or workload.
    #[arg(long = "group-by", default_value = "s")]
    group_by: GroupBy,
}

fn simulate(args: SimulateArgs, file: &FileConfig) -> Result<()> {
    let section = &file.simulate;
    let (jobs, nodes) = match &args.workload {
        Some(path) => {
            let (header, jobs) = read_trace(path).with_context(|| format!("reading {}", path.display()))?;
            let (nodes, mismatch) = resolve_nodes(header.nodes, args.nodes.or(section.nodes))?;
            if mismatch {
                warn!("using {nodes} nodes instead of the trace header's {:?}", header.nodes);
            }
            (jobs, nodes)
        }
        None => {
            let g = args
                .generator
                .resolve(file.generator.as_ref(), args.nodes.or(section.nodes), args.seed);
            let nodes = g.nodes;
            (generate_workload(&g)?, nodes)
        }
    };
    let mut jobs = jobs;
    let s = args.init_proportion.unwrap_or(section.init_proportion);
    let init = set_initialization_proportion(&mut jobs, s)?;

    let policy_name = args.policy.as_deref().unwrap_or(&section.policy);
    let mut policy: PolicySpec = policy_name.parse()?;
    if let PolicySpec::Packet(cfg) = &mut policy {
        *cfg = PacketConfig {
            k: args.k.or(section.k).unwrap_or(cfg.k),
            t_max_default: secs_to_micros(section.t_max_s),
            ..cfg.clone()
        };
    } else if args.k.is_some() {
        warn!("--k is ignored by the {policy_name} policy");
    }
    policy.validate()?;

    let seed = args.seed.unwrap_or(0);
    info!("{} jobs on {nodes} nodes, init {init} us, {policy}", jobs.len());
    let trace = run_simulation(&jobs, &policy, nodes, seed)?;
    let endpoint = args.wait_endpoint.unwrap_or(section.wait_endpoint);
    let m = compute_metrics(&trace, endpoint)?;

    let mut out = io::stdout().lock();
    writeln!(out, "policy={policy}")?;
    writeln!(out, "nodes={nodes}")?;
    writeln!(out, "jobs={}", jobs.len())?;
    writeln!(out, "offered_load={:.6}", offered_load(&jobs, nodes)?)?;
    writeln!(out, "init_proportion={s}")?;
    writeln!(out, "wait_endpoint={endpoint}")?;
    writeln!(out, "full_utilization={:.9}", m.full_utilization)?;
    writeln!(out, "useful_utilization={:.9}", m.useful_utilization)?;
    writeln!(out, "avg_queue_time={:.6}", m.avg_queue_time)?;
    writeln!(out, "median_queue_time={:.6}", m.median_queue_time)?;
    writeln!(out, "avg_queue_length={:.9}", m.avg_queue_length)?;

    if let Some(path) = args.out {
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        trace.write_jobs_csv(BufWriter::new(f))?;
        info!("trace written to {}", path.display());
    }
    Ok(())
}

fn generate(args: GenerateArgs, file: &FileConfig) -> Result<()> {
    let g = args.generator.resolve(file.generator.as_ref(), args.nodes, args.seed);
    let mut jobs = generate_workload(&g)?;
    if let Some(s) = args.init_proportion {
        set_initialization_proportion(&mut jobs, s)?;
    }
    let header = WorkloadHeader {
        nodes: Some(g.nodes),
        types: Some(g.h_types),
        init_proportion: args.init_proportion,
        seed: Some(g.seed),
        version: Some(TRACE_FORMAT_VERSION.to_string()),
    };
    write_trace(&args.out, &header, &jobs).with_context(|| format!("writing {}", args.out.display()))?;
    info!("{} jobs written to {}", jobs.len(), args.out.display());
    Ok(())
}

fn sweep_config(args: &SweepArgs, file: &FileConfig) -> SweepConfig {
    let mut c = file.sweep.clone().unwrap_or_default();
    if args.paper_scale {
        c.workloads = default_workloads(true);
    }
    if let Some(out) = &args.out {
        c.output_dir = out.clone();
    }
    if let Some(w) = args.workers {
        c.workers = w;
    }
    if !args.seed.is_empty() {
        c.seeds = args.seed.clone();
    }
    if !args.policy.is_empty() {
        c.policies = args.policy.clone();
    }
    if !args.k.is_empty() {
        c.k_grid = args.k.clone();
    }
    if !args.init_proportion.is_empty() {
        c.s_grid = args.init_proportion.clone();
    }
    if let Some(e) = args.wait_endpoint {
        c.wait_endpoint = e;
    }
    c
}

fn sweep(args: SweepArgs, file: &FileConfig) -> Result<()> {
    let config = sweep_config(&args, file);
    let rows = run_sweep(&config)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let path = write_results(&config.output_dir, &rows)?;
    println!(
        "{} experiments, {failed} failed, results in {}",
        rows.len(),
        path.display()
    );
    if failed > 0 {
        bail!(
            "{failed} experiments failed; see the error column of {}",
            path.display()
        );
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    if args.rel_tol.is_nan() || args.rel_tol < 0.0 {
        bail!("--rel-tol must be non-negative");
    }
    let rows = read_results(&args.results).with_context(|| format!("reading {}", args.results.display()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "workload,policy,S,k_star")?;
    for row in plateau_table(&rows, args.metric, args.rel_tol) {
        let k = row.k_star.map_or_else(|| "none".to_string(), |k| k.to_string());
        writeln!(out, "{},{},{},{k}", row.workload, row.policy, row.s)?;
    }
    if let Some(dir) = args.plot_dir {
        let files = emit_plot_series(&rows, args.metric, args.group_by, &dir)?;
        info!("{} series written under {}", files.len(), dir.display());
    }
    Ok(())
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref().map(Path::new))?;
    match cli.command {
        Command::Simulate(args) => simulate(args, &file),
        Command::Generate(args) => generate(args, &file),
        Command::Sweep(args) => sweep(args, &file),
        Command::Analyze(args) => analyze(args),
    }
}

fn main() {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
