use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::job::{secs_to_micros, Job, Micros, MICROS_PER_SEC};
use crate::workload::{calibrate_load, WorkloadError};

/// Spread of log-runtime around its midpoint in homogeneous mode.
pub const HOMOGENEOUS_SPREAD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Homogeneity {
    Heterogeneous,
    Homogeneous,
}

impl Homogeneity {
    pub fn spread(self) -> f64 {
        match self {
            Homogeneity::Heterogeneous => 1.0,
            Homogeneity::Homogeneous => HOMOGENEOUS_SPREAD,
        }
    }
}

/// Parameters of the synthetic workload generator.
///
/// Arrivals are a Poisson process over `span`; runtimes on the requested
/// nodes are log-uniform in `[runtime_min_s, runtime_max_s]`; node requests
/// are powers of two with probability `pow2_bias` and uniform otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_jobs: usize,
    /// Submission span, microseconds.
    #[serde(rename = "span_us")]
    pub span: Micros,
    pub h_types: u32,
    /// Offered load the runtimes are scaled to.
    pub target_load: f64,
    pub homogeneity: Homogeneity,
    pub nodes: u32,
    pub seed: u64,
    pub runtime_min_s: f64,
    pub runtime_max_s: f64,
    pub req_nodes_min: u32,
    /// Upper bound on requests; `None` means the whole cluster.
    pub req_nodes_max: Option<u32>,
    pub pow2_bias: f64,
}

const DAY: Micros = 24 * 3600 * MICROS_PER_SEC;

impl Default for GeneratorConfig {
    /// 5000 jobs over four days.
    fn default() -> Self {
        GeneratorConfig {
            n_jobs: 5000,
            span: 4 * DAY,
            h_types: 8,
            target_load: 0.9,
            homogeneity: Homogeneity::Heterogeneous,
            nodes: 100,
            seed: 0,
            runtime_min_s: 60.0,
            runtime_max_s: 4.0 * 3600.0,
            req_nodes_min: 1,
            req_nodes_max: None,
            pow2_bias: 0.75,
        }
    }
}

impl GeneratorConfig {
    /// 1000 jobs over one day on 100 nodes.
    pub fn desk() -> Self {
        GeneratorConfig {
            n_jobs: 1000,
            span: DAY,
            ..Default::default()
        }
    }

    fn max_request(&self) -> u32 {
        self.req_nodes_max.map_or(self.nodes, |m| m.min(self.nodes))
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |msg: String| Err(WorkloadError::Config(msg));
        if self.n_jobs == 0 {
            return bad("n_jobs must be positive".into());
        }
        if self.span == 0 {
            return bad("span must be positive".into());
        }
        if self.h_types == 0 {
            return bad("h_types must be at least 1".into());
        }
        if !(self.target_load > 0.0 && self.target_load < 1.0) {
            return Err(WorkloadError::OutOfRange("target_load", self.target_load));
        }
        if self.nodes == 0 {
            return bad("nodes must be positive".into());
        }
        if !(self.runtime_min_s > 0.0 && self.runtime_max_s >= self.runtime_min_s && self.runtime_max_s.is_finite()) {
            return bad(format!(
                "runtime bounds [{}, {}] are not a positive interval",
                self.runtime_min_s, self.runtime_max_s
            ));
        }
        if self.req_nodes_min == 0 || self.req_nodes_min > self.max_request() {
            return bad(format!(
                "req_nodes_min {} cannot be satisfied with at most {} nodes",
                self.req_nodes_min,
                self.max_request()
            ));
        }
        if !(0.0..=1.0).contains(&self.pow2_bias) {
            return bad(format!("pow2_bias {} not in [0, 1]", self.pow2_bias));
        }
        Ok(())
    }
}

/// Samples jobs from the configured distributions without load calibration.
/// Init times are zero.
pub fn generate_raw(config: &GeneratorConfig) -> Result<Vec<Job>, WorkloadError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mean_gap = config.span as f64 / config.n_jobs as f64;
    let gaps = Exp::new(1.0 / mean_gap).map_err(|e| WorkloadError::Config(e.to_string()))?;

    let (lo, hi) = (config.runtime_min_s.ln(), config.runtime_max_s.ln());
    let mid = 0.5 * (lo + hi);
    let spread = config.homogeneity.spread();

    let (min_req, max_req) = (config.req_nodes_min, config.max_request());
    let powers: Vec<u32> = (0..32)
        .map(|p| 1u32 << p)
        .filter(|&n| n >= min_req && n <= max_req)
        .collect();

    let mut clock = 0.0f64;
    let mut jobs = Vec::with_capacity(config.n_jobs);
    for id in 0..config.n_jobs {
        clock += gaps.sample(&mut rng);
        let log_runtime = mid + spread * (rng.random_range(lo..=hi) - mid);
        let runtime = secs_to_micros(log_runtime.exp()).max(1);
        let req = if !powers.is_empty() && rng.random_bool(config.pow2_bias) {
            powers[rng.random_range(0..powers.len())]
        } else {
            rng.random_range(min_req..=max_req)
        };
        let type_id = rng.random_range(0..config.h_types);
        jobs.push(Job::new(id as u64, clock.round() as Micros, runtime, req, type_id, 0));
    }
    Ok(jobs)
}

/// Samples a workload and scales its runtimes to the target offered load.
pub fn generate_workload(config: &GeneratorConfig) -> Result<Vec<Job>, WorkloadError> {
    let mut jobs = generate_raw(config)?;
    calibrate_load(&mut jobs, config.target_load, config.nodes)?;
    Ok(jobs)
}
