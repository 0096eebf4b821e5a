//! Deterministic discrete-event engine.

use thiserror::Error;

use crate::job::JobId;
use crate::policy::PolicyError;

mod cluster;
mod engine;
mod event;
mod group;
mod trace;

pub use cluster::{Allocation, AllocationId, ClusterState};
pub use engine::run_simulation;
pub use event::{Event, EventKind, EventQueue};
pub use group::{group_span, member_offsets, GroupSpan, JobGroup};
pub use trace::{AllocationRecord, JobRecord, QueueSample, SimulationTrace};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cluster must have at least one node")]
    EmptyCluster,
    #[error("node count must be at least 1")]
    ZeroNodes,
    #[error("over-allocation: {requested} nodes requested, {free} free")]
    OverAllocation { requested: u32, free: u32 },
    #[error("no running allocation with id {0}")]
    UnknownAllocation(AllocationId),
    #[error("job {job_id} requests {req_nodes} nodes but the cluster has {total_nodes}")]
    RejectedJob {
        job_id: JobId,
        req_nodes: u32,
        total_nodes: u32,
    },
    #[error("job {0} has zero runtime or zero requested nodes")]
    InvalidJob(JobId),
    #[error("duplicate job id {0}")]
    DuplicateJob(JobId),
    #[error("workload is not sorted by submit time at job {0}")]
    UnsortedWorkload(JobId),
    #[error("policy dispatched job {0} which is not waiting")]
    InvalidDecision(JobId),
    #[error("job {0} was never dispatched")]
    Unfinished(JobId),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}
