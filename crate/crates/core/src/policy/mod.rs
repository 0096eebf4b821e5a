//! Scheduling policies: the group-based Packet algorithm and two rigid
//! baselines (FCFS and EASY backfilling).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::job::{Job, Micros, MICROS_PER_SEC};
use crate::sim::{ClusterState, JobGroup};

mod easy;
mod fcfs;
mod packet;

pub use easy::{easy_backfill_dispatch, EasyBackfill};
pub use fcfs::{fcfs_dispatch, Fcfs};
pub use packet::{
    group_node_demand, grouping_advisability, packet_dispatch, queue_weight, select_queue, Packet, TypeQueue,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("unknown policy '{0}' (expected packet, fcfs or easy)")]
    UnknownPolicy(String),
}

/// One group started on `node_count` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchDecision {
    pub group: JobGroup,
    pub node_count: u32,
}

/// A queueing policy driven by the simulation engine.
///
/// The engine calls [`Scheduler::enqueue`] on every submit and
/// [`Scheduler::schedule`] after every event. Decisions must never ask for
/// more nodes than are free.
pub trait Scheduler {
    fn enqueue(&mut self, job: &Job);
    fn schedule(&mut self, now: Micros, cluster: &ClusterState) -> Vec<DispatchDecision>;
    /// Jobs submitted but not yet dispatched.
    fn queued(&self) -> usize;
}

pub const DEFAULT_MAX_WAIT: Micros = 24 * 3600 * MICROS_PER_SEC;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PacketConfig {
    /// Scale ratio: a group's run phase targets `k` times its init time.
    pub k: f64,
    /// Aging horizon `T_max` used when a type has no override, in microseconds.
    pub t_max_default: Micros,
    /// Per-type priority `P_j`; missing types use 1.0.
    pub priorities: BTreeMap<u32, f64>,
    /// Per-type `T_max` overrides.
    pub max_wait: BTreeMap<u32, Micros>,
}

impl Default for PacketConfig {
    fn default() -> Self {
        PacketConfig {
            k: 1.0,
            t_max_default: DEFAULT_MAX_WAIT,
            priorities: BTreeMap::new(),
            max_wait: BTreeMap::new(),
        }
    }
}

impl PacketConfig {
    pub fn with_k(k: f64) -> Self {
        PacketConfig {
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        // NaN fails every comparison, so these reject it too
        if self.k.is_nan() || self.k <= 0.0 {
            return Err(PolicyError::NonPositive {
                name: "k",
                value: self.k,
            });
        }
        if self.t_max_default == 0 {
            return Err(PolicyError::NonPositive {
                name: "t_max_default",
                value: 0.0,
            });
        }
        for &p in self.priorities.values() {
            if p.is_nan() || p <= 0.0 {
                return Err(PolicyError::NonPositive {
                    name: "priority",
                    value: p,
                });
            }
        }
        if self.max_wait.values().any(|&t| t == 0) {
            return Err(PolicyError::NonPositive {
                name: "max_wait",
                value: 0.0,
            });
        }
        Ok(())
    }

    pub fn priority(&self, type_id: u32) -> f64 {
        self.priorities.get(&type_id).copied().unwrap_or(1.0)
    }

    pub fn max_wait(&self, type_id: u32) -> Micros {
        self.max_wait.get(&type_id).copied().unwrap_or(self.t_max_default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicySpec {
    Packet(PacketConfig),
    Fcfs,
    Easy,
}

impl PolicySpec {
    pub fn packet(k: f64) -> Self {
        PolicySpec::Packet(PacketConfig::with_k(k))
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Packet(_) => "packet",
            PolicySpec::Fcfs => "fcfs",
            PolicySpec::Easy => "easy",
        }
    }

    /// Rigid policies run each job on exactly its requested nodes.
    pub fn is_rigid(&self) -> bool {
        !matches!(self, PolicySpec::Packet(_))
    }

    pub fn k(&self) -> Option<f64> {
        match self {
            PolicySpec::Packet(c) => Some(c.k),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        match self {
            PolicySpec::Packet(c) => c.validate(),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Scheduler>, PolicyError> {
        self.validate()?;
        Ok(match self {
            PolicySpec::Packet(c) => Box::new(Packet::new(c.clone())),
            PolicySpec::Fcfs => Box::new(Fcfs::default()),
            PolicySpec::Easy => Box::new(EasyBackfill::default()),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Packet(c) => write!(f, "packet(k={})", c.k),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = PolicyError;

    /// Parses `fcfs`, `easy`, `packet` (k = 1) or `packet:<k>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "fcfs" => Ok(PolicySpec::Fcfs),
            "easy" | "easy-backfill" | "backfill" => Ok(PolicySpec::Easy),
            "packet" => Ok(PolicySpec::Packet(PacketConfig::default())),
            other => {
                let k = other
                    .strip_prefix("packet:")
                    .and_then(|k| k.parse::<f64>().ok())
                    .ok_or_else(|| PolicyError::UnknownPolicy(other.to_string()))?;
                let spec = PolicySpec::packet(k);
                spec.validate()?;
                Ok(spec)
            }
        }
    }
}
