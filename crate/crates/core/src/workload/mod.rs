//! Synthetic workloads, load calibration, initialization proportion and the
//! workload trace file format.

use thiserror::Error;

mod calibrate;
mod generator;
mod io;

pub use calibrate::{calibrate_load, init_proportion, offered_load, set_initialization_proportion};
pub use generator::{generate_raw, generate_workload, GeneratorConfig, Homogeneity, HOMOGENEOUS_SPREAD};
pub use io::{
    read_trace, read_trace_from, resolve_nodes, write_trace, write_trace_to, WorkloadHeader, TRACE_COLUMNS,
    TRACE_FORMAT_VERSION,
};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("{0} must be in the open interval (0, 1), got {1}")]
    OutOfRange(&'static str, f64),
    #[error("workload is empty")]
    Empty,
    #[error("workload has zero total work or zero submission span")]
    ZeroLoad,
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("line {line}: job {job_id} is submitted before its predecessor")]
    Unsorted { line: u64, job_id: u64 },
    #[error("node count missing from both the trace header and the configuration")]
    MissingNodes,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
