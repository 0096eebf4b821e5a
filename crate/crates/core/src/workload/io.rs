//! Workload trace files.
//!
//! UTF-8 CSV with `# key=value` header lines followed by a column row:
//!
//! ```text
//! # M=100
//! # h=8
//! # S=0.05
//! # seed=7
//! # version=1
//! job_id,submit_us,req_nodes,runtime_us,type_id,init_us
//! 0,51234,4,1800000000,3,94000000
//! ```
//!
//! Times are integer microseconds. Single-node work is derived on load as
//! `runtime_us * req_nodes`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use log::warn;
use serde::Deserialize;

use crate::job::Job;
use crate::workload::WorkloadError;

pub const TRACE_COLUMNS: [&str; 6] = ["job_id", "submit_us", "req_nodes", "runtime_us", "type_id", "init_us"];
pub const TRACE_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorkloadHeader {
    /// `M`, node count the workload was built for.
    pub nodes: Option<u32>,
    /// `h`, number of job types.
    pub types: Option<u32>,
    /// `S`, initialization proportion.
    pub init_proportion: Option<f64>,
    pub seed: Option<u64>,
    pub version: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Row {
    job_id: u64,
    submit_us: u64,
    req_nodes: u32,
    runtime_us: i64,
    type_id: u32,
    init_us: u64,
}

pub fn write_trace_to<W: Write>(out: W, header: &WorkloadHeader, jobs: &[Job]) -> Result<(), WorkloadError> {
    let mut out = BufWriter::new(out);
    if let Some(m) = header.nodes {
        writeln!(out, "# M={m}")?;
    }
    if let Some(h) = header.types {
        writeln!(out, "# h={h}")?;
    }
    if let Some(s) = header.init_proportion {
        writeln!(out, "# S={s}")?;
    }
    if let Some(seed) = header.seed {
        writeln!(out, "# seed={seed}")?;
    }
    writeln!(
        out,
        "# version={}",
        header.version.as_deref().unwrap_or(TRACE_FORMAT_VERSION)
    )?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for j in jobs {
        w.write_record(&[
            j.id.to_string(),
            j.submit.to_string(),
            j.req_nodes.to_string(),
            j.runtime_on_req.to_string(),
            j.type_id.to_string(),
            j.init_time.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: impl AsRef<Path>, header: &WorkloadHeader, jobs: &[Job]) -> Result<(), WorkloadError> {
    write_trace_to(File::create(path)?, header, jobs)
}

fn parse_header_line(line: &str, header: &mut WorkloadHeader, line_no: u64) -> Result<(), WorkloadError> {
    let body = line.trim_start_matches('#').trim();
    let Some((key, value)) = body.split_once('=') else {
        return Ok(()); // free-form comment
    };
    let (key, value) = (key.trim(), value.trim());
    let err = |msg: String| WorkloadError::Parse { line: line_no, msg };
    match key {
        "M" => header.nodes = Some(value.parse().map_err(|e| err(format!("bad M '{value}': {e}")))?),
        "h" => header.types = Some(value.parse().map_err(|e| err(format!("bad h '{value}': {e}")))?),
        "S" => header.init_proportion = Some(value.parse().map_err(|e| err(format!("bad S '{value}': {e}")))?),
        "seed" => header.seed = Some(value.parse().map_err(|e| err(format!("bad seed '{value}': {e}")))?),
        "version" => header.version = Some(value.to_string()),
        _ => {}
    }
    Ok(())
}

pub fn read_trace_from<R: Read>(input: R) -> Result<(WorkloadHeader, Vec<Job>), WorkloadError> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;

    let mut header = WorkloadHeader::default();
    for (i, line) in text.as_bytes().lines().enumerate() {
        let line = line?;
        if !line.starts_with('#') {
            break;
        }
        parse_header_line(&line, &mut header, i as u64 + 1)?;
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let columns = reader.headers()?.clone();
    if columns.iter().ne(TRACE_COLUMNS) {
        let line = reader.position().line();
        return Err(WorkloadError::Parse {
            line,
            msg: format!(
                "expected columns {}, found {}",
                TRACE_COLUMNS.join(","),
                columns.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut jobs = Vec::new();
    let mut last_submit = 0;
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        let more = reader.read_record(&mut record).map_err(|e| WorkloadError::Parse {
            line: e.position().map_or(line, |p| p.line()),
            msg: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(line, |p| p.line());
        let parse_err = |msg: String| WorkloadError::Parse { line, msg };
        let row: Row = record
            .deserialize(Some(&columns))
            .map_err(|e| parse_err(e.to_string()))?;
        if row.runtime_us <= 0 {
            return Err(parse_err(format!(
                "runtime_us must be positive, got {}",
                row.runtime_us
            )));
        }
        if row.req_nodes == 0 {
            return Err(parse_err("req_nodes must be at least 1".into()));
        }
        if row.submit_us < last_submit {
            return Err(WorkloadError::Unsorted {
                line,
                job_id: row.job_id,
            });
        }
        last_submit = row.submit_us;
        jobs.push(Job::new(
            row.job_id,
            row.submit_us,
            row.runtime_us as u64,
            row.req_nodes,
            row.type_id,
            row.init_us,
        ));
    }
    Ok((header, jobs))
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<(WorkloadHeader, Vec<Job>), WorkloadError> {
    read_trace_from(File::open(path)?)
}

/// Picks the node count for an experiment. The configured value wins over
/// the file header; a disagreement is logged and reported as `true`.
pub fn resolve_nodes(header: Option<u32>, configured: Option<u32>) -> Result<(u32, bool), WorkloadError> {
    match (header, configured) {
        (Some(h), Some(c)) if h != c => {
            warn!("trace header says M={h} but the configuration says M={c}; using {c}");
            Ok((c, true))
        }
        (_, Some(c)) => Ok((c, false)),
        (Some(h), None) => Ok((h, false)),
        (None, None) => Err(WorkloadError::MissingNodes),
    }
}
