use std::collections::HashMap;

use log::debug;

use crate::job::{Job, Micros};
use crate::policy::{DispatchDecision, PolicySpec};
use crate::sim::cluster::ClusterState;
use crate::sim::event::{EventKind, EventQueue};
use crate::sim::group::{group_span, member_offsets};
use crate::sim::trace::{AllocationRecord, JobRecord, QueueSample, SimulationTrace};
use crate::sim::SimError;

/// Replays `jobs` on a cluster of `total_nodes` nodes under `policy`.
///
/// Jobs must be sorted by submit time. The policy runs after every submit
/// and every completion; at equal times completions are handled first.
/// `seed` is recorded in the trace; the engine itself draws no randomness.
pub fn run_simulation(
    jobs: &[Job],
    policy: &PolicySpec,
    total_nodes: u32,
    seed: u64,
) -> Result<SimulationTrace, SimError> {
    let mut cluster = ClusterState::new(total_nodes)?;
    validate(jobs, policy, total_nodes)?;
    let mut scheduler = policy.build()?;

    let index: HashMap<_, _> = jobs.iter().enumerate().map(|(i, j)| (j.id, i)).collect();
    let mut records: Vec<Option<JobRecord>> = vec![None; jobs.len()];
    let mut submitted = vec![false; jobs.len()];
    let mut trace = SimulationTrace::empty(total_nodes, policy.to_string(), seed);

    let mut events = EventQueue::new();
    for (i, job) in jobs.iter().enumerate() {
        events.push(job.submit, EventKind::Submit(i));
    }

    while let Some(event) = events.pop() {
        let now = event.time;
        match event.kind {
            EventKind::Submit(i) => {
                submitted[i] = true;
                scheduler.enqueue(&jobs[i]);
            }
            EventKind::Completion(id) => {
                cluster.release(id)?;
            }
        }
        for decision in scheduler.schedule(now, &cluster) {
            let alloc = start_group(&decision, now, jobs, &index, &submitted, &mut records, &mut cluster)?;
            events.push(alloc.end, EventKind::Completion(alloc.id));
            trace.allocations.push(alloc);
        }
        debug_assert!(cluster.conserved());
        trace.queue_samples.push(QueueSample {
            time: now,
            queue_len: scheduler.queued(),
        });
        trace.events_processed += 1;
    }

    trace.jobs = records
        .into_iter()
        .zip(jobs)
        .map(|(r, j)| r.ok_or(SimError::Unfinished(j.id)))
        .collect::<Result<_, _>>()?;
    debug!(
        "{}: {} jobs, {} allocations, {} events",
        trace.policy,
        trace.jobs.len(),
        trace.allocations.len(),
        trace.events_processed
    );
    Ok(trace)
}

fn validate(jobs: &[Job], policy: &PolicySpec, total_nodes: u32) -> Result<(), SimError> {
    let mut seen = HashMap::with_capacity(jobs.len());
    let mut last_submit = 0;
    for job in jobs {
        if !job.is_valid() {
            return Err(SimError::InvalidJob(job.id));
        }
        if seen.insert(job.id, ()).is_some() {
            return Err(SimError::DuplicateJob(job.id));
        }
        if job.submit < last_submit {
            return Err(SimError::UnsortedWorkload(job.id));
        }
        last_submit = job.submit;
        if policy.is_rigid() && job.req_nodes > total_nodes {
            return Err(SimError::RejectedJob {
                job_id: job.id,
                req_nodes: job.req_nodes,
                total_nodes,
            });
        }
    }
    Ok(())
}

fn start_group(
    decision: &DispatchDecision,
    now: Micros,
    jobs: &[Job],
    index: &HashMap<u64, usize>,
    submitted: &[bool],
    records: &mut [Option<JobRecord>],
    cluster: &mut ClusterState,
) -> Result<AllocationRecord, SimError> {
    let group = &decision.group;
    let span = group_span(group, decision.node_count)?;
    let members = group
        .jobs
        .iter()
        .map(|id| match index.get(id) {
            Some(&i) if submitted[i] && records[i].is_none() => Ok(i),
            _ => Err(SimError::InvalidDecision(*id)),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let end = now + span.total();
    let alloc_id = cluster.allocate(decision.node_count, now, end)?;
    let run_start = now + span.init;
    let works: Vec<Micros> = members.iter().map(|&i| jobs[i].work_1node()).collect();
    for (&i, (off_start, off_end)) in members.iter().zip(member_offsets(&works, decision.node_count)?) {
        let job = &jobs[i];
        records[i] = Some(JobRecord {
            job_id: job.id,
            type_id: job.type_id,
            submit: job.submit,
            dispatch: now,
            run_start: run_start + off_start,
            run_end: run_start + off_end,
            allocation: alloc_id,
            work_1node: job.work_1node(),
        });
    }
    Ok(AllocationRecord {
        id: alloc_id,
        type_id: group.type_id,
        nodes: decision.node_count,
        start: now,
        init_end: run_start,
        end,
        jobs: group.jobs.clone(),
    })
}
