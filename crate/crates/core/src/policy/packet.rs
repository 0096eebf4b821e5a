//! The Packet algorithm.
//!
//! Jobs wait in one FIFO queue per type. Whenever the engine asks for
//! decisions, the heaviest non-empty queue is drained into a single group,
//! which receives enough nodes that its run phase lasts about `k` times its
//! initialization, capped by the free nodes. This repeats until nodes or
//! queues run out.

use std::collections::{BTreeMap, VecDeque};

use crate::job::{Job, Micros};
use crate::policy::{DispatchDecision, PacketConfig, PolicyError, Scheduler};
use crate::sim::{ClusterState, JobGroup};

/// Waiting jobs of one type.
#[derive(Debug, Clone)]
pub struct TypeQueue {
    pub type_id: u32,
    jobs: VecDeque<Job>,
    /// `P_j`.
    pub priority: f64,
    /// `T_max`, microseconds.
    pub max_wait: Micros,
    total_work: Micros,
}

impl TypeQueue {
    pub fn new(type_id: u32, priority: f64, max_wait: Micros) -> Self {
        TypeQueue {
            type_id,
            jobs: VecDeque::new(),
            priority,
            max_wait,
            total_work: 0,
        }
    }

    pub fn push(&mut self, job: Job) {
        debug_assert_eq!(job.type_id, self.type_id);
        debug_assert!(self.jobs.back().is_none_or(|b| b.submit <= job.submit));
        self.total_work += job.work_1node();
        self.jobs.push_back(job);
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> impl Iterator<Item = &Job> {
        self.jobs.iter()
    }

    pub fn head(&self) -> Option<&Job> {
        self.jobs.front()
    }

    /// Sum of single-node work of all queued jobs.
    pub fn total_work(&self) -> Micros {
        self.total_work
    }

    /// Initialization time of the type, taken from the head job.
    pub fn init_time(&self) -> Option<Micros> {
        self.head().map(|j| j.init_time)
    }

    /// Removes every queued job as one group.
    pub fn drain_group(&mut self) -> JobGroup {
        let group = JobGroup::from_jobs(self.type_id, self.jobs.iter());
        self.jobs.clear();
        self.total_work = 0;
        group
    }
}

/// `C_j`: queued single-node work over the type's init time.
///
/// An empty queue scores 0; a zero init time scores `+inf`, i.e. grouping is
/// free and the queue is maximally advisable.
pub fn grouping_advisability(queue: &TypeQueue) -> f64 {
    match queue.init_time() {
        None => 0.0,
        Some(0) => f64::INFINITY,
        Some(s) => queue.total_work() as f64 / s as f64,
    }
}

/// `W = C * P * (1 + T_cur / T_max)` with `T_cur` the head job's wait so far.
pub fn queue_weight(queue: &TypeQueue, now: Micros) -> f64 {
    let Some(head) = queue.head() else {
        return 0.0;
    };
    let waited = now.saturating_sub(head.submit) as f64;
    let aging = 1.0 + waited / queue.max_wait as f64;
    grouping_advisability(queue) * queue.priority * aging
}

/// The non-empty queue with the largest weight; ties go to the lowest type id.
pub fn select_queue<'a>(queues: impl IntoIterator<Item = &'a TypeQueue>, now: Micros) -> Option<u32> {
    let mut best: Option<(u32, f64)> = None;
    for q in queues {
        if q.is_empty() {
            continue;
        }
        let w = queue_weight(q, now);
        match best {
            Some((id, bw)) if w < bw || (w == bw && id < q.type_id) => {}
            _ => best = Some((q.type_id, w)),
        }
    }
    best.map(|(id, _)| id)
}

/// `m_threshold = max(1, floor(total_work / (k * s)))`.
///
/// Quotients within 1e-9 (relative) of an integer are snapped to it so that
/// decimal scale ratios such as 0.3 do not lose a node to binary rounding.
pub fn group_node_demand(total_work: Micros, init_time: Micros, k: f64) -> Result<u64, PolicyError> {
    if total_work == 0 {
        return Err(PolicyError::NonPositive {
            name: "total_work",
            value: 0.0,
        });
    }
    if init_time == 0 {
        return Err(PolicyError::NonPositive {
            name: "init_time",
            value: 0.0,
        });
    }
    if k.is_nan() || k <= 0.0 {
        return Err(PolicyError::NonPositive { name: "k", value: k });
    }
    let ratio = total_work as f64 / (k * init_time as f64);
    let nearest = ratio.round();
    let nodes = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    // float-to-int casts saturate, so an enormous ratio becomes u64::MAX
    Ok((nodes as u64).max(1))
}

/// Runs Packet steps 2-5 repeatedly until no node is free or every queue is
/// empty. Each selected queue is emptied into one group.
pub fn packet_dispatch(
    queues: &mut BTreeMap<u32, TypeQueue>,
    mut free: u32,
    config: &PacketConfig,
    now: Micros,
) -> Vec<DispatchDecision> {
    let mut decisions = Vec::new();
    while free > 0 {
        let Some(type_id) = select_queue(queues.values(), now) else {
            break;
        };
        let queue = queues.get_mut(&type_id).expect("selected queue exists");
        let group = queue.drain_group();
        let demand = if group.init_time == 0 {
            // zero-cost init: nothing to amortize, take every free node
            u64::MAX
        } else {
            group_node_demand(group.total_work, group.init_time, config.k).expect("validated inputs")
        };
        let node_count = demand.min(free as u64) as u32;
        free -= node_count;
        decisions.push(DispatchDecision { group, node_count });
    }
    decisions
}

#[derive(Debug, Clone)]
pub struct Packet {
    config: PacketConfig,
    queues: BTreeMap<u32, TypeQueue>,
    queued: usize,
}

impl Packet {
    pub fn new(config: PacketConfig) -> Self {
        Packet {
            config,
            queues: BTreeMap::new(),
            queued: 0,
        }
    }

    pub fn queues(&self) -> &BTreeMap<u32, TypeQueue> {
        &self.queues
    }
}

impl Scheduler for Packet {
    fn enqueue(&mut self, job: &Job) {
        let config = &self.config;
        self.queues
            .entry(job.type_id)
            .or_insert_with(|| TypeQueue::new(job.type_id, config.priority(job.type_id), config.max_wait(job.type_id)))
            .push(job.clone());
        self.queued += 1;
    }

    fn schedule(&mut self, now: Micros, cluster: &ClusterState) -> Vec<DispatchDecision> {
        if self.queued == 0 {
            return Vec::new();
        }
        let decisions = packet_dispatch(&mut self.queues, cluster.free_nodes(), &self.config, now);
        self.queued -= decisions.iter().map(|d| d.group.jobs.len()).sum::<usize>();
        decisions
    }

    fn queued(&self) -> usize {
        self.queued
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::job::MICROS_PER_SEC;

    const SEC: Micros = MICROS_PER_SEC;
    const MIN: Micros = 60 * SEC;

    fn queue(type_id: u32, works: &[Micros], s: Micros) -> TypeQueue {
        let mut q = TypeQueue::new(type_id, 1.0, 100 * SEC);
        for (i, &w) in works.iter().enumerate() {
            q.push(Job::single_node(i as u64, 0, w, type_id, s));
        }
        q
    }

    #[test]
    fn advisability_examples() {
        assert_eq!(grouping_advisability(&queue(0, &[100 * SEC], 10 * SEC)), 10.0);
        assert_eq!(grouping_advisability(&queue(0, &[7 * SEC], 7 * SEC)), 1.0);
        assert_eq!(grouping_advisability(&queue(0, &[60 * SEC; 4], 10 * SEC)), 24.0);
        assert_eq!(grouping_advisability(&queue(0, &[SEC], 0)), f64::INFINITY);
    }

    #[test]
    fn weight_examples() {
        let q = queue(0, &[100 * SEC], 10 * SEC);
        assert_eq!(queue_weight(&q, 0), 10.0);
        assert_eq!(queue_weight(&q, 100 * SEC), 20.0);
        let mut q = queue(0, &[60 * SEC; 4], 10 * SEC);
        q.priority = 2.0;
        assert_eq!(queue_weight(&q, 50 * SEC), 72.0);
    }

    #[test]
    fn select_examples() {
        let empty = [TypeQueue::new(0, 1.0, SEC), TypeQueue::new(1, 1.0, SEC)];
        assert_eq!(select_queue(&empty, 0), None);

        let qs = [queue(0, &[50 * SEC], 10 * SEC), queue(1, &[70 * SEC], 10 * SEC)];
        assert_eq!(select_queue(&qs, 0), Some(1));

        let qs = [queue(2, &[50 * SEC], 10 * SEC), queue(0, &[50 * SEC], 10 * SEC)];
        assert_eq!(select_queue(&qs, 0), Some(0));
    }

    #[test]
    fn demand_examples() {
        assert_eq!(group_node_demand(4 * MIN, MIN, 0.5).unwrap(), 8);
        assert_eq!(group_node_demand(4 * MIN, MIN, 1.0).unwrap(), 4);
        assert_eq!(group_node_demand(4 * MIN, MIN, 2.0).unwrap(), 2);
        assert_eq!(group_node_demand(4 * MIN, MIN, 4.0).unwrap(), 1);
        assert_eq!(group_node_demand(5 * SEC, 2 * SEC, 1.0).unwrap(), 2);
        assert_eq!(group_node_demand(SEC, MIN, 1.0).unwrap(), 1);
        assert_eq!(group_node_demand(SEC, MIN, f64::INFINITY).unwrap(), 1);
        assert!(group_node_demand(0, MIN, 1.0).is_err());
        assert!(group_node_demand(SEC, 0, 1.0).is_err());
        assert!(group_node_demand(SEC, SEC, 0.0).is_err());
    }

    #[test]
    fn demand_snaps_decimal_ratios() {
        // work = n * k * s exactly, for every decimal k in 0.1..=1.0
        for tenths in 1..=10u64 {
            let k = tenths as f64 / 10.0;
            for n in 1..=200u64 {
                assert_eq!(group_node_demand(n * tenths * SEC, 10 * SEC, k).unwrap(), n);
            }
        }
        assert_eq!(group_node_demand(6 * SEC, SEC, 0.1 * 3.0).unwrap(), 20);
    }

    #[test]
    fn dispatch_caps_at_free_nodes() {
        let mut qs = BTreeMap::from([(0, queue(0, &[4 * MIN], MIN))]);
        let d = packet_dispatch(&mut qs, 3, &PacketConfig::with_k(0.5), 0);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].node_count, 3);
        assert!(qs[&0].is_empty());
    }

    #[test]
    fn dispatch_without_free_nodes_is_empty() {
        let mut qs = BTreeMap::from([(0, queue(0, &[4 * MIN], MIN))]);
        assert!(packet_dispatch(&mut qs, 0, &PacketConfig::with_k(0.5), 0).is_empty());
        assert_eq!(qs[&0].len(), 1);
    }

    #[test]
    fn dispatch_loops_heaviest_first() {
        // weights 5 and 7 with s = 10 s; k = 1 gives demands 5 and 7
        let mut qs = BTreeMap::from([
            (0, queue(0, &[50 * SEC], 10 * SEC)),
            (1, queue(1, &[30 * SEC, 40 * SEC], 10 * SEC)),
        ]);
        let d = packet_dispatch(&mut qs, 20, &PacketConfig::with_k(1.0), 0);
        let got: Vec<_> = d
            .iter()
            .map(|d| (d.group.type_id, d.node_count, d.group.jobs.len()))
            .collect();
        assert_eq!(got, vec![(1, 7, 2), (0, 5, 1)]);
        assert!(qs.values().all(TypeQueue::is_empty));
    }

    #[test]
    fn zero_init_takes_all_free_nodes() {
        let mut qs = BTreeMap::from([(0, queue(0, &[SEC], 0))]);
        let d = packet_dispatch(&mut qs, 9, &PacketConfig::with_k(100.0), 0);
        assert_eq!(d[0].node_count, 9);
    }

    #[test]
    fn scheduler_tracks_queue_length() {
        let mut p = Packet::new(PacketConfig::with_k(4.0));
        p.enqueue(&Job::single_node(0, 0, MIN, 0, MIN));
        p.enqueue(&Job::single_node(1, 0, MIN, 1, MIN));
        assert_eq!(p.queued(), 2);
        let cluster = ClusterState::new(1).unwrap();
        let d = p.schedule(0, &cluster);
        assert_eq!(d.len(), 1);
        assert_eq!(p.queued(), 1);
    }
}
