use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::metrics::MetricsReport;
use crate::sweep::{detect_plateau, ResultRow, SweepError, SweepPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    FullUtilization,
    UsefulUtilization,
    AvgQueueTime,
    MedianQueueTime,
    AvgQueueLength,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::FullUtilization,
        Metric::UsefulUtilization,
        Metric::AvgQueueTime,
        Metric::MedianQueueTime,
        Metric::AvgQueueLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::FullUtilization => "full_utilization",
            Metric::UsefulUtilization => "useful_utilization",
            Metric::AvgQueueTime => "avg_queue_time",
            Metric::MedianQueueTime => "median_queue_time",
            Metric::AvgQueueLength => "avg_queue_length",
        }
    }

    pub fn value(self, m: &MetricsReport) -> f64 {
        match self {
            Metric::FullUtilization => m.full_utilization,
            Metric::UsefulUtilization => m.useful_utilization,
            Metric::AvgQueueTime => m.avg_queue_time,
            Metric::MedianQueueTime => m.median_queue_time,
            Metric::AvgQueueLength => m.avg_queue_length,
        }
    }

    /// Absolute plateau tolerance: one second for time metrics.
    pub fn abs_floor(self) -> f64 {
        match self {
            Metric::AvgQueueTime | Metric::MedianQueueTime => 1.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| SweepError::UnknownMetric {
                name: s.to_string(),
                valid: Metric::ALL.map(Metric::name).join(", "),
            })
    }
}

/// Directory layout of emitted series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupBy {
    /// `<workload>/<policy>/<metric>_S<S>.csv`: one figure per workload, one
    /// curve per S.
    #[default]
    S,
    /// `S<S>/<policy>/<metric>_<workload>.csv`: one figure per S, one curve
    /// per workload.
    Workload,
}

impl FromStr for GroupBy {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" | "init-proportion" => Ok(GroupBy::S),
            "workload" => Ok(GroupBy::Workload),
            other => Err(SweepError::Config(format!(
                "unknown group-by '{other}' (expected s or workload)"
            ))),
        }
    }
}

/// Seed aggregate of one metric at one `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub k: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

type CellKey = (String, SweepPolicy, u64);

/// Groups successful rows with a scale ratio by `(workload, policy, S)` and
/// aggregates seeds per `k`, ascending.
pub fn aggregate_series(rows: &[ResultRow], metric: Metric) -> BTreeMap<CellKey, Vec<SeriesPoint>> {
    let mut cells: BTreeMap<CellKey, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        let (Some(k), Some(m)) = (r.k, r.metrics.as_ref()) else {
            continue;
        };
        // f64 keys through their bit patterns; k and S are positive so the
        // bit order matches the numeric order
        cells
            .entry((r.workload.clone(), r.policy, r.s.to_bits()))
            .or_default()
            .entry(k.to_bits())
            .or_default()
            .push(metric.value(m));
    }
    cells
        .into_iter()
        .map(|(key, by_k)| {
            let series = by_k
                .into_iter()
                .map(|(kb, vals)| SeriesPoint {
                    k: f64::from_bits(kb),
                    mean: vals.iter().sum::<f64>() / vals.len() as f64,
                    min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                    max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    samples: vals.len(),
                })
                .collect();
            (key, series)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauRow {
    pub workload: String,
    pub policy: SweepPolicy,
    pub s: f64,
    pub k_star: Option<f64>,
}

/// Plateau onset of the seed-mean series of every `(workload, policy, S)` cell.
pub fn plateau_table(rows: &[ResultRow], metric: Metric, rel_tol: f64) -> Vec<PlateauRow> {
    aggregate_series(rows, metric)
        .into_iter()
        .map(|((workload, policy, sb), series)| {
            let pts: Vec<(f64, f64)> = series.iter().map(|p| (p.k, p.mean)).collect();
            PlateauRow {
                workload,
                policy,
                s: f64::from_bits(sb),
                k_star: detect_plateau(&pts, rel_tol, metric.abs_floor()),
            }
        })
        .collect()
}

/// Writes one `k,<metric>,min,max,seeds` file per `(workload, policy, S)`
/// and returns the paths written.
pub fn emit_plot_series(
    rows: &[ResultRow],
    metric: Metric,
    group_by: GroupBy,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, SweepError> {
    let cells = aggregate_series(rows, metric);
    if cells.is_empty() {
        return Err(SweepError::EmptyResults);
    }
    let mut written = Vec::new();
    for ((workload, policy, sb), series) in cells {
        let s = f64::from_bits(sb);
        let path = match group_by {
            GroupBy::S => out_dir
                .as_ref()
                .join(&workload)
                .join(policy.name())
                .join(format!("{metric}_S{s}.csv")),
            GroupBy::Workload => out_dir
                .as_ref()
                .join(format!("S{s}"))
                .join(policy.name())
                .join(format!("{metric}_{workload}.csv")),
        };
        fs::create_dir_all(path.parent().expect("joined path has a parent"))?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["k", metric.name(), "min", "max", "seeds"])?;
        for p in series {
            w.write_record(&[
                p.k.to_string(),
                p.mean.to_string(),
                p.min.to_string(),
                p.max.to_string(),
                p.samples.to_string(),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
