use std::io::{self, Write};

use crate::job::{JobId, Micros};
use crate::sim::cluster::AllocationId;

/// Lifecycle of one job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRecord {
    pub job_id: JobId,
    pub type_id: u32,
    pub submit: Micros,
    /// Start of the owning group's initialization.
    pub dispatch: Micros,
    /// Start of this job's own execution inside the group.
    pub run_start: Micros,
    pub run_end: Micros,
    pub allocation: AllocationId,
    /// Single-node work, kept for work-conservation checks.
    pub work_1node: Micros,
}

/// One dispatched group: `[start, init_end)` initialization, `[init_end, end)` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationRecord {
    pub id: AllocationId,
    pub type_id: u32,
    pub nodes: u32,
    pub start: Micros,
    pub init_end: Micros,
    pub end: Micros,
    pub jobs: Vec<JobId>,
}

impl AllocationRecord {
    pub fn init_interval(&self) -> (Micros, Micros) {
        (self.start, self.init_end)
    }

    pub fn run_interval(&self) -> (Micros, Micros) {
        (self.init_end, self.end)
    }
}

/// Queue length right after all processing of one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueSample {
    pub time: Micros,
    pub queue_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    pub total_nodes: u32,
    pub policy: String,
    pub seed: u64,
    /// One record per job, in workload order.
    pub jobs: Vec<JobRecord>,
    /// In allocation-id (dispatch) order.
    pub allocations: Vec<AllocationRecord>,
    pub queue_samples: Vec<QueueSample>,
    pub events_processed: u64,
}

impl SimulationTrace {
    pub fn empty(total_nodes: u32, policy: impl Into<String>, seed: u64) -> Self {
        SimulationTrace {
            total_nodes,
            policy: policy.into(),
            seed,
            jobs: Vec::new(),
            allocations: Vec::new(),
            queue_samples: Vec::new(),
            events_processed: 0,
        }
    }

    pub fn last_submit(&self) -> Option<Micros> {
        self.jobs.iter().map(|j| j.submit).max()
    }

    /// Writes the evaluated workflow: one row per job with its start and end.
    pub fn write_jobs_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# M={}", self.total_nodes)?;
        writeln!(out, "# policy={}", self.policy)?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(
            out,
            "job_id,type_id,submit_us,dispatch_us,run_start_us,run_end_us,allocation,nodes"
        )?;
        for j in &self.jobs {
            let nodes = self.allocations[j.allocation as usize].nodes;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                j.job_id, j.type_id, j.submit, j.dispatch, j.run_start, j.run_end, j.allocation, nodes
            )?;
        }
        Ok(())
    }
}
