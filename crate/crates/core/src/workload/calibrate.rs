use crate::job::{Job, Micros};
use crate::workload::WorkloadError;

fn total_work(jobs: &[Job]) -> u128 {
    jobs.iter().map(|j| j.work_1node() as u128).sum()
}

/// Demanded node-time over available node-time between time zero and the
/// last submit.
pub fn offered_load(jobs: &[Job], nodes: u32) -> Result<f64, WorkloadError> {
    let span = jobs.iter().map(|j| j.submit).max().ok_or(WorkloadError::Empty)?;
    let work = total_work(jobs);
    if span == 0 || work == 0 || nodes == 0 {
        return Err(WorkloadError::ZeroLoad);
    }
    Ok(work as f64 / (nodes as f64 * span as f64))
}

/// Scales every runtime by one common factor so the offered load equals
/// `target`, and returns the factor.
///
/// Runtimes stay integral: each is rounded so that the running total of
/// node-time tracks the exactly scaled total, which keeps the achieved load
/// within a few node-microseconds of the target. No runtime drops below 1 µs.
pub fn calibrate_load(jobs: &mut [Job], target: f64, nodes: u32) -> Result<f64, WorkloadError> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(WorkloadError::OutOfRange("target_load", target));
    }
    let measured = offered_load(jobs, nodes)?;
    let factor = target / measured;
    if (factor - 1.0).abs() < 1e-12 {
        return Ok(1.0);
    }
    let mut raw_prefix: u128 = 0;
    let mut assigned: u128 = 0;
    for job in jobs.iter_mut() {
        raw_prefix += job.work_1node() as u128;
        let wanted = factor * raw_prefix as f64 - assigned as f64;
        let runtime = (wanted / job.req_nodes as f64).round().max(1.0) as Micros;
        job.runtime_on_req = runtime;
        assigned += job.work_1node() as u128;
    }
    Ok(factor)
}

/// `S = sum(s) / (sum(s) + sum(e))` with `e` the single-node work.
pub fn init_proportion(jobs: &[Job]) -> f64 {
    let init: u128 = jobs.iter().map(|j| j.init_time as u128).sum();
    let total = init + total_work(jobs);
    if total == 0 {
        return 0.0;
    }
    init as f64 / total as f64
}

/// Sets one common init time `s = S * sum(e) / (n * (1 - S))` on every job
/// so that [`init_proportion`] returns `target`, and returns `s`.
pub fn set_initialization_proportion(jobs: &mut [Job], target: f64) -> Result<Micros, WorkloadError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(WorkloadError::OutOfRange("initialization proportion", target));
    }
    if jobs.is_empty() {
        return Err(WorkloadError::Empty);
    }
    let work = total_work(jobs) as f64;
    let init = (target * work / (jobs.len() as f64 * (1.0 - target))).round() as Micros;
    for job in jobs.iter_mut() {
        job.init_time = init;
    }
    Ok(init)
}
