//! Experiment grid expansion and parallel execution.
//!
//! A sweep is the Cartesian product workloads x policies x S x k x seeds
//! (k only applies to Packet). Experiments run on a bounded worker pool and
//! results are merged in expansion order, so the output does not depend on
//! the worker count.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::job::{Job, Micros, MICROS_PER_SEC};
use crate::metrics::{compute_metrics, MetricsReport, WaitEndpoint};
use crate::policy::{PacketConfig, PolicySpec, DEFAULT_MAX_WAIT};
use crate::sim::run_simulation;
use crate::workload::{
    generate_workload, read_trace, resolve_nodes, set_initialization_proportion, GeneratorConfig, Homogeneity,
    WorkloadError,
};

mod analysis;
mod plateau;
mod results;

pub use analysis::{aggregate_series, emit_plot_series, plateau_table, GroupBy, Metric, PlateauRow, SeriesPoint};
pub use plateau::{detect_plateau, DEFAULT_REL_TOL};
pub use results::{read_results, read_results_from, results_csv, timings_csv, write_results, RESULT_COLUMNS};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("unknown metric '{name}'; valid metrics: {valid}")]
    UnknownMetric { name: String, valid: String },
    #[error("no result rows to plot")]
    EmptyResults,
    #[error("results file line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// The 37-point scale-ratio grid: 0.1..1 by 0.1, then 2..10 by 1,
/// 20..100 by 10 and 200..1000 by 100.
pub fn default_k_grid() -> Vec<f64> {
    let tenths = (1..=10).map(|i| i as f64 / 10.0);
    let ones = (2..=10).map(f64::from);
    let tens = (2..=10).map(|i| 10.0 * i as f64);
    let hundreds = (2..=10).map(|i| 100.0 * i as f64);
    tenths.chain(ones).chain(tens).chain(hundreds).collect()
}

pub fn default_s_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepPolicy {
    Packet,
    Fcfs,
    Easy,
}

impl SweepPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SweepPolicy::Packet => "packet",
            SweepPolicy::Fcfs => "fcfs",
            SweepPolicy::Easy => "easy",
        }
    }
}

impl fmt::Display for SweepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepPolicy {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "packet" => Ok(SweepPolicy::Packet),
            "fcfs" => Ok(SweepPolicy::Fcfs),
            "easy" | "easy-backfill" | "backfill" => Ok(SweepPolicy::Easy),
            other => Err(SweepError::Config(format!("unknown policy '{other}'"))),
        }
    }
}

/// A workload dimension of the grid: a trace file, or the generator (whose
/// seed is replaced by each experiment seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub id: String,
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Node count; overrides the file header or the generator setting.
    #[serde(default)]
    pub nodes: Option<u32>,
    #[serde(default)]
    pub generator: GeneratorConfig,
}

impl WorkloadSpec {
    pub fn generated(id: impl Into<String>, generator: GeneratorConfig) -> Self {
        WorkloadSpec {
            id: id.into(),
            file: None,
            nodes: None,
            generator,
        }
    }

    /// Jobs (init times unset) and node count for one seed.
    pub fn resolve(&self, seed: u64) -> Result<(Vec<Job>, u32), WorkloadError> {
        match &self.file {
            Some(path) => {
                let (header, jobs) = read_trace(path)?;
                let (nodes, _) = resolve_nodes(header.nodes, self.nodes)?;
                Ok((jobs, nodes))
            }
            None => {
                let mut g = self.generator.clone();
                g.seed = seed;
                if let Some(n) = self.nodes {
                    g.nodes = n;
                }
                let nodes = g.nodes;
                Ok((generate_workload(&g)?, nodes))
            }
        }
    }
}

/// The six reference workflows: heterogeneous and homogeneous generators at
/// offered loads 0.85, 0.90 and 0.95.
///
/// Desk scale is 1000 jobs over one day on 100 nodes; paper scale is 5000
/// jobs over four days on 500 (heterogeneous) or 100 (homogeneous) nodes.
pub fn default_workloads(paper_scale: bool) -> Vec<WorkloadSpec> {
    let mut out = Vec::new();
    for homogeneity in [Homogeneity::Heterogeneous, Homogeneity::Homogeneous] {
        for load in [0.85, 0.90, 0.95] {
            let base = if paper_scale {
                let nodes = match homogeneity {
                    Homogeneity::Heterogeneous => 500,
                    Homogeneity::Homogeneous => 100,
                };
                GeneratorConfig {
                    nodes,
                    ..GeneratorConfig::default()
                }
            } else {
                GeneratorConfig::desk()
            };
            let tag = match homogeneity {
                Homogeneity::Heterogeneous => "het",
                Homogeneity::Homogeneous => "hom",
            };
            out.push(WorkloadSpec::generated(
                format!("{tag}{load:.2}"),
                GeneratorConfig {
                    homogeneity,
                    target_load: load,
                    ..base
                },
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub workloads: Vec<WorkloadSpec>,
    pub policies: Vec<SweepPolicy>,
    pub k_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub t_max_default_s: f64,
    pub wait_endpoint: WaitEndpoint,
    /// Worker threads; 0 means one per CPU.
    pub workers: usize,
    pub output_dir: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            workloads: default_workloads(false),
            policies: vec![SweepPolicy::Packet],
            k_grid: default_k_grid(),
            s_grid: default_s_grid(),
            seeds: vec![0],
            t_max_default_s: (DEFAULT_MAX_WAIT / MICROS_PER_SEC) as f64,
            wait_endpoint: WaitEndpoint::Job,
            workers: 0,
            output_dir: PathBuf::from("results"),
        }
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::Config(m.to_string()));
        if self.workloads.is_empty() {
            return bad("no workloads");
        }
        if self.policies.is_empty() {
            return bad("no policies");
        }
        if self.s_grid.is_empty() {
            return bad("empty S grid");
        }
        if self.seeds.is_empty() {
            return bad("no seeds");
        }
        if self.policies.contains(&SweepPolicy::Packet) && self.k_grid.is_empty() {
            return bad("empty k grid");
        }
        if self.k_grid.iter().any(|&k| k.is_nan() || k <= 0.0) || !strictly_increasing(&self.k_grid) {
            return bad("k grid must be positive and strictly increasing");
        }
        if self.s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) || !strictly_increasing(&self.s_grid) {
            return bad("S grid must lie in (0, 1) and be strictly increasing");
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return bad("duplicate seeds");
        }
        if self.policies.iter().collect::<HashSet<_>>().len() != self.policies.len() {
            return bad("duplicate policies");
        }
        if self.workloads.iter().map(|w| &w.id).collect::<HashSet<_>>().len() != self.workloads.len() {
            return bad("duplicate workload ids");
        }
        if self.t_max_default_s.is_nan() || self.t_max_default_s <= 0.0 {
            return bad("t_max_default_s must be positive");
        }
        Ok(())
    }

    fn t_max_default(&self) -> Micros {
        crate::job::secs_to_micros(self.t_max_default_s).max(1)
    }
}

/// One point of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub workload: usize,
    pub workload_id: String,
    pub policy: SweepPolicy,
    /// Scale ratio; `None` for the rigid baselines.
    pub k: Option<f64>,
    pub s: f64,
    pub seed: u64,
}

impl Experiment {
    pub fn policy_spec(&self, t_max_default: Micros) -> PolicySpec {
        match (self.policy, self.k) {
            (SweepPolicy::Packet, Some(k)) => PolicySpec::Packet(PacketConfig {
                k,
                t_max_default,
                ..Default::default()
            }),
            (SweepPolicy::Packet, None) => unreachable!("packet experiments carry k"),
            (SweepPolicy::Fcfs, _) => PolicySpec::Fcfs,
            (SweepPolicy::Easy, _) => PolicySpec::Easy,
        }
    }
}

/// Expands the grid in (workload, policy, S, k, seed) order.
pub fn expand_grid(config: &SweepConfig) -> Result<Vec<Experiment>, SweepError> {
    config.validate()?;
    let mut out = Vec::new();
    for (wi, w) in config.workloads.iter().enumerate() {
        for &policy in &config.policies {
            let ks: Vec<Option<f64>> = match policy {
                SweepPolicy::Packet => config.k_grid.iter().copied().map(Some).collect(),
                _ => vec![None],
            };
            for &s in &config.s_grid {
                for &k in &ks {
                    for &seed in &config.seeds {
                        out.push(Experiment {
                            workload: wi,
                            workload_id: w.id.clone(),
                            policy,
                            k,
                            s,
                            seed,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub workload: String,
    pub policy: SweepPolicy,
    pub k: Option<f64>,
    pub s: f64,
    pub seed: u64,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
    /// Wall-clock time of the experiment; kept out of the results file.
    pub wall_clock_s: f64,
}

impl ResultRow {
    fn new(e: &Experiment, outcome: Result<MetricsReport, String>, wall_clock_s: f64) -> Self {
        let (metrics, error) = match outcome {
            Ok(m) => (Some(m), None),
            Err(msg) => (None, Some(msg)),
        };
        ResultRow {
            workload: e.workload_id.clone(),
            policy: e.policy,
            k: e.k,
            s: e.s,
            seed: e.seed,
            metrics,
            error,
            wall_clock_s,
        }
    }
}

/// Runs a single experiment on prepared jobs (init times are overwritten).
pub fn run_experiment(
    experiment: &Experiment,
    base_jobs: &[Job],
    nodes: u32,
    t_max_default: Micros,
    endpoint: WaitEndpoint,
) -> Result<MetricsReport, String> {
    let mut jobs = base_jobs.to_vec();
    set_initialization_proportion(&mut jobs, experiment.s).map_err(|e| e.to_string())?;
    let policy = experiment.policy_spec(t_max_default);
    let trace = run_simulation(&jobs, &policy, nodes, experiment.seed).map_err(|e| e.to_string())?;
    compute_metrics(&trace, endpoint).map_err(|e| e.to_string())
}

/// Jobs and node count of one (workload, seed), or why they could not be built.
type Prepared = Result<(Vec<Job>, u32), String>;

/// Runs every experiment of the grid. Failing experiments become error rows.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>, SweepError> {
    let experiments = expand_grid(config)?;

    let keys: Vec<(usize, u64)> = {
        let mut seen = HashSet::new();
        experiments
            .iter()
            .map(|e| (e.workload, e.seed))
            .filter(|k| seen.insert(*k))
            .collect()
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| SweepError::Config(e.to_string()))?;

    let rows = pool.install(|| {
        let prepared: HashMap<(usize, u64), Prepared> = keys
            .par_iter()
            .map(|&(wi, seed)| {
                (
                    (wi, seed),
                    config.workloads[wi].resolve(seed).map_err(|e| e.to_string()),
                )
            })
            .collect();
        let t_max = config.t_max_default();
        experiments
            .par_iter()
            .map(|e| {
                let started = Instant::now();
                let outcome = match &prepared[&(e.workload, e.seed)] {
                    Ok((jobs, nodes)) => run_experiment(e, jobs, *nodes, t_max, config.wait_endpoint),
                    Err(msg) => Err(msg.clone()),
                };
                if let Err(msg) = &outcome {
                    log::warn!(
                        "experiment {} {} k={:?} S={} seed={} failed: {msg}",
                        e.workload_id,
                        e.policy,
                        e.k,
                        e.s,
                        e.seed
                    );
                }
                ResultRow::new(e, outcome, started.elapsed().as_secs_f64())
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}
