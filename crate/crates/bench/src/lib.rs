//! Fixtures shared by the benchmarks.

use packetsim_core::workload::set_initialization_proportion;
use packetsim_core::{generate_workload, GeneratorConfig, Job};

/// The full-scale workload (5000 jobs over four days on 100 nodes) with
/// initialization proportion `s`.
pub fn full_scale_workload(s: f64, seed: u64) -> Vec<Job> {
    let mut jobs = generate_workload(&GeneratorConfig {
        seed,
        ..GeneratorConfig::default()
    })
    .expect("default generator config is valid");
    set_initialization_proportion(&mut jobs, s).expect("s in (0, 1)");
    jobs
}

/// The desk-scale workload (1000 jobs over one day on 100 nodes).
pub fn desk_workload(s: f64, seed: u64) -> Vec<Job> {
    let mut jobs = generate_workload(&GeneratorConfig {
        seed,
        ..GeneratorConfig::desk()
    })
    .expect("desk generator config is valid");
    set_initialization_proportion(&mut jobs, s).expect("s in (0, 1)");
    jobs
}
