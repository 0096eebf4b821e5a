//! Efficiency metrics over the measurement window `[0, last submit]`.
//!
//! Activity after the last submit is excluded from every average.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::job::{micros_to_secs, Micros};
use crate::sim::SimulationTrace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no jobs in trace")]
    Empty,
    #[error("measurement window is empty (last submit at {0} us)")]
    DegenerateWindow(Micros),
    #[error("unknown wait endpoint '{0}' (expected job or group)")]
    UnknownEndpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: Micros,
    pub end: Micros,
}

impl Window {
    pub fn len(&self) -> Micros {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Length of `[a, b)` inside the window.
    fn overlap(&self, a: Micros, b: Micros) -> Micros {
        b.min(self.end).saturating_sub(a.max(self.start))
    }
}

/// Where a job's queue time ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaitEndpoint {
    /// The job's own execution start inside its group.
    #[default]
    Job,
    /// The group's dispatch (start of initialization).
    Group,
}

impl FromStr for WaitEndpoint {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "job" => Ok(WaitEndpoint::Job),
            "group" => Ok(WaitEndpoint::Group),
            other => Err(MetricsError::UnknownEndpoint(other.to_string())),
        }
    }
}

impl fmt::Display for WaitEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaitEndpoint::Job => "job",
            WaitEndpoint::Group => "group",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub full_utilization: f64,
    pub useful_utilization: f64,
    /// Seconds.
    pub avg_queue_time: f64,
    /// Seconds.
    pub median_queue_time: f64,
    pub avg_queue_length: f64,
    pub window_start: f64,
    pub window_end: f64,
}

/// `(0, max submit)`; a window of zero length is an error.
pub fn measurement_window(submits: impl IntoIterator<Item = Micros>) -> Result<Window, MetricsError> {
    let end = submits.into_iter().max().ok_or(MetricsError::Empty)?;
    let window = Window { start: 0, end };
    if window.is_empty() {
        return Err(MetricsError::DegenerateWindow(end));
    }
    Ok(window)
}

/// Busy node-time inside the window over `M * window length`. Init phases
/// count as busy only when `count_init` is set.
pub fn utilization(trace: &SimulationTrace, window: Window, count_init: bool) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    let busy: u128 = trace
        .allocations
        .iter()
        .map(|a| {
            let (rs, re) = a.run_interval();
            let mut t = window.overlap(rs, re);
            if count_init {
                let (is, ie) = a.init_interval();
                t += window.overlap(is, ie);
            }
            a.nodes as u128 * t as u128
        })
        .sum();
    busy as f64 / (trace.total_nodes as f64 * window.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueTimeStats {
    pub avg: f64,
    pub median: f64,
}

/// Mean and median wait, in seconds, of jobs submitted inside the window.
/// Waits that extend past the window end are cut off there.
pub fn queue_time_stats(trace: &SimulationTrace, window: Window, endpoint: WaitEndpoint) -> QueueTimeStats {
    let mut waits: Vec<Micros> = trace
        .jobs
        .iter()
        .filter(|j| j.submit >= window.start && j.submit <= window.end)
        .map(|j| {
            let started = match endpoint {
                WaitEndpoint::Job => j.run_start,
                WaitEndpoint::Group => j.dispatch,
            };
            started.min(window.end) - j.submit
        })
        .collect();
    if waits.is_empty() {
        return QueueTimeStats { avg: 0.0, median: 0.0 };
    }
    waits.sort_unstable();
    let n = waits.len();
    let sum: u128 = waits.iter().map(|&w| w as u128).sum();
    let median = if n % 2 == 1 {
        micros_to_secs(waits[n / 2])
    } else {
        0.5 * (micros_to_secs(waits[n / 2 - 1]) + micros_to_secs(waits[n / 2]))
    };
    QueueTimeStats {
        avg: sum as f64 / n as f64 / 1e6,
        median,
    }
}

/// Time-weighted mean number of submitted, not yet dispatched jobs.
pub fn avg_queue_length(trace: &SimulationTrace, window: Window) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    let mut area: u128 = 0;
    let mut since = window.start;
    let mut current = 0usize;
    for s in &trace.queue_samples {
        if s.time > window.end {
            break;
        }
        if s.time > since {
            area += current as u128 * (s.time - since) as u128;
            since = s.time;
        }
        current = s.queue_len;
    }
    area += current as u128 * window.end.saturating_sub(since) as u128;
    area as f64 / window.len() as f64
}

pub fn compute_metrics(trace: &SimulationTrace, endpoint: WaitEndpoint) -> Result<MetricsReport, MetricsError> {
    let window = measurement_window(trace.jobs.iter().map(|j| j.submit))?;
    let waits = queue_time_stats(trace, window, endpoint);
    Ok(MetricsReport {
        full_utilization: utilization(trace, window, true),
        useful_utilization: utilization(trace, window, false),
        avg_queue_time: waits.avg,
        median_queue_time: waits.median,
        avg_queue_length: avg_queue_length(trace, window),
        window_start: micros_to_secs(window.start),
        window_end: micros_to_secs(window.end),
    })
}
