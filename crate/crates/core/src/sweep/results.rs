//! Results CSV: one row per experiment, times in seconds with six decimals.
//! Wall-clock timings go to a separate file so the results stay
//! byte-reproducible.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::metrics::MetricsReport;
use crate::sweep::{ResultRow, SweepError};

pub const RESULT_COLUMNS: [&str; 13] = [
    "workload",
    "policy",
    "k",
    "S",
    "seed",
    "full_utilization",
    "useful_utilization",
    "avg_queue_time",
    "median_queue_time",
    "avg_queue_length",
    "window_start",
    "window_end",
    "error",
];

fn key_fields(r: &ResultRow) -> Vec<String> {
    vec![
        r.workload.clone(),
        r.policy.to_string(),
        r.k.map(|k| k.to_string()).unwrap_or_default(),
        r.s.to_string(),
        r.seed.to_string(),
    ]
}

pub fn results_csv(rows: &[ResultRow]) -> Result<String, SweepError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        let mut rec = key_fields(r);
        match &r.metrics {
            Some(m) => rec.extend([
                format!("{:.9}", m.full_utilization),
                format!("{:.9}", m.useful_utilization),
                format!("{:.6}", m.avg_queue_time),
                format!("{:.6}", m.median_queue_time),
                format!("{:.9}", m.avg_queue_length),
                format!("{:.6}", m.window_start),
                format!("{:.6}", m.window_end),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 7)),
        }
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| SweepError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn timings_csv(rows: &[ResultRow]) -> Result<String, SweepError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["workload", "policy", "k", "S", "seed", "wall_clock_s"])?;
    for r in rows {
        let mut rec = key_fields(r);
        rec.push(format!("{:.6}", r.wall_clock_s));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| SweepError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `results.csv` and `timings.csv` into `dir`, returning the results path.
pub fn write_results(dir: impl AsRef<Path>, rows: &[ResultRow]) -> Result<PathBuf, SweepError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let path = dir.join("results.csv");
    fs::write(&path, results_csv(rows)?)?;
    fs::write(dir.join("timings.csv"), timings_csv(rows)?)?;
    Ok(path)
}

fn opt_f64(s: &str, line: u64, col: &str) -> Result<Option<f64>, SweepError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| SweepError::Parse {
        line,
        msg: format!("column {col}: '{s}': {e}"),
    })
}

pub fn read_results_from<R: Read>(input: R) -> Result<Vec<ResultRow>, SweepError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RESULT_COLUMNS) {
        return Err(SweepError::Parse {
            line: 1,
            msg: format!("expected columns {}", RESULT_COLUMNS.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| opt_f64(field(i), line, RESULT_COLUMNS[i]);
        let required = |i: usize| {
            num(i)?.ok_or_else(|| SweepError::Parse {
                line,
                msg: format!("missing {}", RESULT_COLUMNS[i]),
            })
        };
        let metric_cells: Vec<Option<f64>> = (5..12).map(num).collect::<Result<_, _>>()?;
        let metrics = if metric_cells.iter().all(Option::is_some) {
            let v: Vec<f64> = metric_cells.into_iter().flatten().collect();
            Some(MetricsReport {
                full_utilization: v[0],
                useful_utilization: v[1],
                avg_queue_time: v[2],
                median_queue_time: v[3],
                avg_queue_length: v[4],
                window_start: v[5],
                window_end: v[6],
            })
        } else {
            None
        };
        rows.push(ResultRow {
            workload: field(0).to_string(),
            policy: field(1).parse()?,
            k: num(2)?,
            s: required(3)?,
            seed: field(4).parse().map_err(|e| SweepError::Parse {
                line,
                msg: format!("column seed: {e}"),
            })?,
            metrics,
            error: Some(field(12).to_string()).filter(|s| !s.is_empty()),
            wall_clock_s: 0.0,
        });
    }
    Ok(rows)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, SweepError> {
    read_results_from(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SweepPolicy;

    fn row(k: Option<f64>, ok: bool) -> ResultRow {
        ResultRow {
            workload: "w".into(),
            policy: if k.is_some() {
                SweepPolicy::Packet
            } else {
                SweepPolicy::Fcfs
            },
            k,
            s: 0.05,
            seed: 3,
            metrics: ok.then_some(MetricsReport {
                full_utilization: 0.5,
                useful_utilization: 0.25,
                avg_queue_time: 12.5,
                median_queue_time: 1.0 / 3.0,
                avg_queue_length: 2.0,
                window_start: 0.0,
                window_end: 86400.0,
            }),
            error: (!ok).then(|| "job 4 requests 9 nodes, cluster has 8".to_string()),
            wall_clock_s: 0.123,
        }
    }

    #[test]
    fn formats_times_with_six_decimals() {
        let csv = results_csv(&[row(Some(0.5), true)]).unwrap();
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(
            line,
            "w,packet,0.5,0.05,3,0.500000000,0.250000000,12.500000,0.333333,2.000000000,0.000000,86400.000000,"
        );
        assert!(!csv.contains("0.123"));
    }

    #[test]
    fn error_rows_round_trip() {
        let rows = vec![row(Some(0.5), true), row(None, false)];
        let csv = results_csv(&rows).unwrap();
        let back = read_results_from(csv.as_bytes()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].k, None);
        assert_eq!(back[1].metrics, None);
        assert_eq!(back[1].error, rows[1].error);
        assert_eq!(back[0].metrics.unwrap().avg_queue_time, 12.5);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_results_from("a,b\n1,2\n".as_bytes()).is_err());
    }
}
