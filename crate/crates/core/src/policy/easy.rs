//! EASY backfilling with exact runtimes.
//!
//! The queue head gets a single reservation at the earliest time enough
//! nodes are released. A later job may start now if it fits and either ends
//! by that time or only uses nodes the head will not need.

use std::collections::VecDeque;

use crate::job::{Job, Micros};
use crate::policy::{DispatchDecision, Scheduler};
use crate::sim::{ClusterState, JobGroup};

/// Allocation length of a rigid job: its init plus its runtime on the
/// requested nodes.
fn occupancy(job: &Job) -> Micros {
    job.init_time + job.runtime_on_req
}

fn start(job: Job, decisions: &mut Vec<DispatchDecision>) {
    decisions.push(DispatchDecision {
        group: JobGroup::single(&job),
        node_count: job.req_nodes,
    });
}

/// Earliest time at which `needed` nodes are free, given the free count now
/// and the `(end, nodes)` of running allocations, plus the nodes left over
/// at that time.
fn reservation(now: Micros, free: u32, ends: &mut [(Micros, u32)], needed: u32) -> Option<(Micros, u32)> {
    if free >= needed {
        return Some((now, free - needed));
    }
    ends.sort_unstable();
    let mut avail = free;
    let mut i = 0;
    while i < ends.len() {
        let t = ends[i].0;
        // every allocation ending at t releases together
        while i < ends.len() && ends[i].0 == t {
            avail += ends[i].1;
            i += 1;
        }
        if avail >= needed {
            return Some((t, avail - needed));
        }
    }
    None
}

pub fn easy_backfill_dispatch(queue: &mut VecDeque<Job>, cluster: &ClusterState, now: Micros) -> Vec<DispatchDecision> {
    let mut decisions = Vec::new();
    let mut free = cluster.free_nodes();
    let mut ends: Vec<(Micros, u32)> = cluster.running().map(|a| (a.end, a.nodes)).collect();

    while let Some(head) = queue.front() {
        if head.req_nodes > free {
            break;
        }
        let job = queue.pop_front().expect("non-empty");
        free -= job.req_nodes;
        ends.push((now + occupancy(&job), job.req_nodes));
        start(job, &mut decisions);
    }

    let Some(head) = queue.front() else {
        return decisions;
    };
    let Some((shadow, mut extra)) = reservation(now, free, &mut ends, head.req_nodes) else {
        // the head can never fit; the engine rejects such jobs up front
        return decisions;
    };

    let mut i = 1;
    while i < queue.len() && free > 0 {
        let job = &queue[i];
        let fits_now = job.req_nodes <= free;
        let ends_in_time = now + occupancy(job) <= shadow;
        if fits_now && (ends_in_time || job.req_nodes <= extra) {
            if !ends_in_time {
                extra -= job.req_nodes;
            }
            free -= job.req_nodes;
            let job = queue.remove(i).expect("index in range");
            start(job, &mut decisions);
        } else {
            i += 1;
        }
    }
    decisions
}

#[derive(Debug, Default, Clone)]
pub struct EasyBackfill {
    queue: VecDeque<Job>,
}

impl Scheduler for EasyBackfill {
    fn enqueue(&mut self, job: &Job) {
        self.queue.push_back(job.clone());
    }

    fn schedule(&mut self, now: Micros, cluster: &ClusterState) -> Vec<DispatchDecision> {
        easy_backfill_dispatch(&mut self.queue, cluster, now)
    }

    fn queued(&self) -> usize {
        self.queue.len()
    }
}
