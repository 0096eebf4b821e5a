//! Jobs and simulated time.

use serde::{Deserialize, Serialize};

/// Simulated time and durations, in integer microseconds.
pub type Micros = u64;

pub type JobId = u64;

pub const MICROS_PER_SEC: u64 = 1_000_000;

/// Converts seconds to microseconds, rounding to the nearest microsecond.
pub fn secs_to_micros(secs: f64) -> Micros {
    (secs * MICROS_PER_SEC as f64).round() as Micros
}

pub fn micros_to_secs(us: Micros) -> f64 {
    us as f64 / MICROS_PER_SEC as f64
}

/// A moldable job with linear speedup.
///
/// The job is described the way a rigid-job trace describes it (a node
/// request and the runtime on those nodes). Its single-node work is derived
/// from those two, so a job read from a trace file always round-trips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub submit: Micros,
    /// Runtime when executed on `req_nodes` nodes.
    pub runtime_on_req: Micros,
    pub req_nodes: u32,
    pub type_id: u32,
    /// Initialization overhead of the job's type; independent of node count.
    pub init_time: Micros,
}

impl Job {
    pub fn new(
        id: JobId,
        submit: Micros,
        runtime_on_req: Micros,
        req_nodes: u32,
        type_id: u32,
        init_time: Micros,
    ) -> Self {
        Job {
            id,
            submit,
            runtime_on_req,
            req_nodes,
            type_id,
            init_time,
        }
    }

    /// Single-node job, where the runtime is the single-node work.
    pub fn single_node(id: JobId, submit: Micros, work: Micros, type_id: u32, init_time: Micros) -> Self {
        Job::new(id, submit, work, 1, type_id, init_time)
    }

    /// Execution time on one node (node-microseconds of work).
    pub fn work_1node(&self) -> Micros {
        self.runtime_on_req * self.req_nodes as Micros
    }

    pub fn is_valid(&self) -> bool {
        self.runtime_on_req > 0 && self.req_nodes >= 1
    }
}
