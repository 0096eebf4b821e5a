use crate::job::{Job, JobId, Micros};
use crate::sim::SimError;

/// Same-type jobs dispatched as one meta-job: one initialization, then the
/// members run one after another, each across all of the group's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobGroup {
    pub type_id: u32,
    /// Members in submit (FIFO) order.
    pub jobs: Vec<JobId>,
    pub total_work: Micros,
    pub init_time: Micros,
}

impl JobGroup {
    /// Builds a group from queued jobs. The init time is the first member's;
    /// all members of a type share it.
    pub fn from_jobs<'a>(type_id: u32, jobs: impl IntoIterator<Item = &'a Job>) -> Self {
        let mut group = JobGroup {
            type_id,
            jobs: Vec::new(),
            total_work: 0,
            init_time: 0,
        };
        for (i, job) in jobs.into_iter().enumerate() {
            debug_assert_eq!(job.type_id, type_id);
            if i == 0 {
                group.init_time = job.init_time;
            }
            group.jobs.push(job.id);
            group.total_work += job.work_1node();
        }
        group
    }

    /// A one-job allocation as used by the rigid baselines.
    pub fn single(job: &Job) -> Self {
        Self::from_jobs(job.type_id, std::iter::once(job))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSpan {
    pub init: Micros,
    pub run: Micros,
}

impl GroupSpan {
    pub fn total(&self) -> Micros {
        self.init + self.run
    }
}

/// Wall-clock phases of a group on `nodes` nodes under linear speedup.
pub fn group_span(group: &JobGroup, nodes: u32) -> Result<GroupSpan, SimError> {
    if nodes == 0 {
        return Err(SimError::ZeroNodes);
    }
    Ok(GroupSpan {
        init: group.init_time,
        run: div_ceil(group.total_work, nodes),
    })
}

/// Per-member `(start, end)` offsets from the start of the run phase.
///
/// Offsets are rounded up from exact prefix sums of work, so members are
/// contiguous, the last member ends exactly at the group's run length, and
/// every member's duration is within one microsecond of `work / nodes`.
pub fn member_offsets(works: &[Micros], nodes: u32) -> Result<Vec<(Micros, Micros)>, SimError> {
    if nodes == 0 {
        return Err(SimError::ZeroNodes);
    }
    let mut prefix: Micros = 0;
    let mut out = Vec::with_capacity(works.len());
    for &w in works {
        let start = div_ceil(prefix, nodes);
        prefix += w;
        out.push((start, div_ceil(prefix, nodes)));
    }
    Ok(out)
}

fn div_ceil(a: Micros, m: u32) -> Micros {
    a.div_ceil(m as Micros)
}
