use std::collections::VecDeque;

use crate::job::{Job, Micros};
use crate::policy::{DispatchDecision, Scheduler};
use crate::sim::{ClusterState, JobGroup};

/// Starts jobs from the head of one global queue while they fit; the head
/// blocks everything behind it.
pub fn fcfs_dispatch(queue: &mut VecDeque<Job>, mut free: u32) -> Vec<DispatchDecision> {
    let mut decisions = Vec::new();
    while let Some(head) = queue.front() {
        if head.req_nodes > free {
            break;
        }
        let job = queue.pop_front().expect("non-empty");
        free -= job.req_nodes;
        decisions.push(DispatchDecision {
            group: JobGroup::single(&job),
            node_count: job.req_nodes,
        });
    }
    decisions
}

#[derive(Debug, Default, Clone)]
pub struct Fcfs {
    queue: VecDeque<Job>,
}

impl Scheduler for Fcfs {
    fn enqueue(&mut self, job: &Job) {
        self.queue.push_back(job.clone());
    }

    fn schedule(&mut self, _now: Micros, cluster: &ClusterState) -> Vec<DispatchDecision> {
        fcfs_dispatch(&mut self.queue, cluster.free_nodes())
    }

    fn queued(&self) -> usize {
        self.queue.len()
    }
}
