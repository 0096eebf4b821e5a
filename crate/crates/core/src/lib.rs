//! Discrete-event simulation of an HPC job management system with
//! group-based (Packet) scheduling.
//!
//! Jobs of the same type are batched so their initialization runs once per
//! group; a scale ratio `k` sizes each group's node allocation. The crate
//! contains the event engine, the Packet policy with FCFS and EASY
//! backfilling baselines, a synthetic workload generator, the efficiency
//! metrics and a parallel parameter-sweep harness.

pub mod job;
pub mod metrics;
pub mod policy;
pub mod sim;
pub mod sweep;
pub mod workload;

pub use job::{micros_to_secs, secs_to_micros, Job, JobId, Micros, MICROS_PER_SEC};
pub use metrics::{compute_metrics, MetricsReport, WaitEndpoint};
pub use policy::{DispatchDecision, PacketConfig, PolicySpec, Scheduler};
pub use sim::{run_simulation, ClusterState, JobGroup, SimError, SimulationTrace};
pub use sweep::{run_sweep, ResultRow, SweepConfig};
pub use workload::{generate_workload, GeneratorConfig, Homogeneity};
