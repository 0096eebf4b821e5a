//! TOML configuration file. Every section is optional; command-line flags
//! override whatever the file sets.
//!
//! ```toml
//! [generator]
//! n_jobs = 1000
//! span_us = 86400000000
//! target_load = 0.9
//! nodes = 100
//!
//! [simulate]
//! policy = "packet"
//! k = 2.0
//! init_proportion = 0.05
//!
//! [sweep]
//! s_grid = [0.05, 0.3, 0.5]
//! seeds = [0, 1, 2, 3, 4]
//! workers = 8
//! ```

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use packetsim_core::sweep::SweepConfig;
use packetsim_core::{GeneratorConfig, WaitEndpoint};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Workload generator used by `generate` and by `simulate` without a
    /// trace file.
    pub generator: Option<GeneratorConfig>,
    pub simulate: SimulateSection,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub policy: String,
    pub k: Option<f64>,
    pub init_proportion: f64,
    pub nodes: Option<u32>,
    pub wait_endpoint: WaitEndpoint,
    /// Maximum-wait cap of the aging factor, seconds.
    pub t_max_s: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            policy: "packet".into(),
            k: None,
            init_proportion: 0.05,
            nodes: None,
            wait_endpoint: WaitEndpoint::Job,
            t_max_s: 86_400.0,
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
