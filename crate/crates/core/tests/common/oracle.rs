//! Brute-force replay of the scheduling model, written independently of the
//! engine: no event heap, no shared policy code. Time advances to the next
//! instant at which anything happens; at each instant the completions are
//! applied one at a time (oldest allocation first), then the submissions in
//! input order, and the policy is consulted after every single one of them.
//!
//! Packet node demands and queue weights are evaluated in exact integer
//! arithmetic; EASY backfilling is decided by recomputing the earliest start
//! of the blocked head with and without the candidate.

use packetsim_core::sim::SimulationTrace;
use packetsim_core::{Job, Micros};

/// 24 hours: the maximum-wait cap used by the aging factor.
const MAX_WAIT: u128 = 86_400 * 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OraclePolicy {
    Fcfs,
    Easy,
    /// Scale ratio `num / den`.
    Packet {
        num: u64,
        den: u64,
    },
}

impl OraclePolicy {
    pub fn spec(self) -> packetsim_core::PolicySpec {
        match self {
            OraclePolicy::Fcfs => packetsim_core::PolicySpec::Fcfs,
            OraclePolicy::Easy => packetsim_core::PolicySpec::Easy,
            OraclePolicy::Packet { num, den } => packetsim_core::PolicySpec::packet(num as f64 / den as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alloc {
    pub start: Micros,
    pub init_end: Micros,
    pub end: Micros,
    pub nodes: u32,
    pub jobs: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Started {
    pub dispatch: Micros,
    pub run_start: Micros,
    pub run_end: Micros,
    pub alloc: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Replay {
    pub allocs: Vec<Alloc>,
    /// Indexed like the input jobs.
    pub jobs: Vec<Option<Started>>,
    /// `(time, waiting jobs)` after every processed event.
    pub queue: Vec<(Micros, usize)>,
}

struct State<'a> {
    input: &'a [Job],
    total: u32,
    free: u32,
    /// Indices into `input`, in arrival order.
    waiting: Vec<usize>,
    /// `(alloc index, end, nodes)` of running allocations.
    running: Vec<(usize, Micros, u32)>,
    out: Replay,
}

fn work(j: &Job) -> u128 {
    j.runtime_on_req as u128 * j.req_nodes as u128
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

impl State<'_> {
    /// Starts `members` as one allocation of `nodes` nodes at `now`.
    fn launch(&mut self, now: Micros, members: Vec<usize>, nodes: u32) {
        assert!(nodes >= 1 && nodes <= self.free, "oracle over-allocates");
        let init = self.input[members[0]].init_time;
        let m = nodes as u128;
        let run_start = now + init;
        let alloc = self.out.allocs.len();
        let mut done: u128 = 0;
        for &i in &members {
            let start = run_start + ceil_div(done, m) as Micros;
            done += work(&self.input[i]);
            let end = run_start + ceil_div(done, m) as Micros;
            self.out.jobs[i] = Some(Started {
                dispatch: now,
                run_start: start,
                run_end: end,
                alloc,
            });
        }
        let end = run_start + ceil_div(done, m) as Micros;
        self.waiting.retain(|w| !members.contains(w));
        self.free -= nodes;
        self.running.push((alloc, end, nodes));
        self.out.allocs.push(Alloc {
            start: now,
            init_end: run_start,
            end,
            nodes,
            jobs: members.iter().map(|&i| self.input[i].id).collect(),
        });
    }

    fn fcfs(&mut self, now: Micros) {
        while let Some(&head) = self.waiting.first() {
            let req = self.input[head].req_nodes;
            if req > self.free {
                break;
            }
            self.launch(now, vec![head], req);
        }
    }

    /// First instant `>= now` at which `needed` nodes are idle, assuming the
    /// running set plus `extra` (end, nodes) allocations and nothing else
    /// starting.
    fn earliest_start(&self, now: Micros, needed: u32, extra: Option<(Micros, u32)>) -> Micros {
        let mut allocs: Vec<(Micros, u32)> = self.running.iter().map(|&(_, e, n)| (e, n)).collect();
        let mut free_now = self.free;
        if let Some((e, n)) = extra {
            allocs.push((e, n));
            free_now -= n;
        }
        let mut candidates: Vec<Micros> = allocs.iter().map(|a| a.0).collect();
        candidates.push(now);
        candidates.sort_unstable();
        for t in candidates {
            let released: u32 = allocs.iter().filter(|a| a.0 <= t).map(|a| a.1).sum();
            if free_now + released >= needed {
                return t.max(now);
            }
        }
        Micros::MAX
    }

    fn easy(&mut self, now: Micros) {
        self.fcfs(now);
        let Some(&head) = self.waiting.first() else {
            return;
        };
        let needed = self.input[head].req_nodes;
        let later: Vec<usize> = self.waiting[1..].to_vec();
        for cand in later {
            let job = &self.input[cand];
            if job.req_nodes > self.free {
                continue;
            }
            let end = now + job.init_time + job.runtime_on_req;
            let without = self.earliest_start(now, needed, None);
            let with = self.earliest_start(now, needed, Some((end, job.req_nodes)));
            if with <= without {
                self.launch(now, vec![cand], job.req_nodes);
            }
        }
    }

    fn packet(&mut self, now: Micros, num: u64, den: u64) {
        while self.free > 0 && !self.waiting.is_empty() {
            // per type: members in arrival order, total work, head submit
            let mut best: Option<(u32, u128, Micros)> = None;
            let mut types: Vec<u32> = self.waiting.iter().map(|&i| self.input[i].type_id).collect();
            types.sort_unstable();
            types.dedup();
            for t in types {
                let members: Vec<&Job> = self
                    .waiting
                    .iter()
                    .map(|&i| &self.input[i])
                    .filter(|j| j.type_id == t)
                    .collect();
                let total: u128 = members.iter().map(|j| work(j)).sum();
                let head_submit = members[0].submit;
                // all jobs share the init time, so the weight order is the
                // order of total * (MAX_WAIT + waited); zero init ties all
                // queues at infinity
                let better = match best {
                    None => true,
                    Some(_) if members[0].init_time == 0 => false,
                    Some((_, bt, bs)) => {
                        total * (MAX_WAIT + (now - head_submit) as u128) > bt * (MAX_WAIT + (now - bs) as u128)
                    }
                };
                if better {
                    best = Some((t, total, head_submit));
                }
            }
            let (t, total, _) = best.expect("non-empty queue");
            let members: Vec<usize> = self
                .waiting
                .iter()
                .copied()
                .filter(|&i| self.input[i].type_id == t)
                .collect();
            let init = self.input[members[0]].init_time as u128;
            let demand = if init == 0 {
                self.free as u128
            } else {
                // floor(total / (k * init)) with k = num / den
                (total * den as u128 / (num as u128 * init)).max(1)
            };
            let nodes = demand.min(self.free as u128) as u32;
            self.launch(now, members, nodes);
        }
    }

    fn schedule(&mut self, now: Micros, policy: OraclePolicy) {
        match policy {
            OraclePolicy::Fcfs => self.fcfs(now),
            OraclePolicy::Easy => self.easy(now),
            OraclePolicy::Packet { num, den } => self.packet(now, num, den),
        }
        assert_eq!(self.free + self.running.iter().map(|r| r.2).sum::<u32>(), self.total);
        self.out.queue.push((now, self.waiting.len()));
    }
}

/// Replays `jobs` (sorted by submit) on `nodes` nodes.
pub fn replay(jobs: &[Job], nodes: u32, policy: OraclePolicy) -> Replay {
    let mut st = State {
        input: jobs,
        total: nodes,
        free: nodes,
        waiting: Vec::new(),
        running: Vec::new(),
        out: Replay {
            jobs: vec![None; jobs.len()],
            ..Default::default()
        },
    };
    let mut next_submit = 0;
    loop {
        let t_submit = jobs.get(next_submit).map(|j| j.submit);
        let t_end = st.running.iter().map(|r| r.1).min();
        let now = match (t_submit, t_end) {
            (None, None) => break,
            (a, b) => a.into_iter().chain(b).min().expect("one is set"),
        };
        let mut ending: Vec<(usize, Micros, u32)> = st.running.iter().copied().filter(|r| r.1 == now).collect();
        ending.sort_unstable();
        for (alloc, _, n) in ending {
            st.running.retain(|r| r.0 != alloc);
            st.free += n;
            st.schedule(now, policy);
        }
        while next_submit < jobs.len() && jobs[next_submit].submit == now {
            st.waiting.push(next_submit);
            next_submit += 1;
            st.schedule(now, policy);
        }
    }
    st.out
}

/// Describes the first difference between an engine trace and a replay.
pub fn compare(trace: &SimulationTrace, replay: &Replay) -> Result<(), String> {
    if trace.allocations.len() != replay.allocs.len() {
        return Err(format!(
            "{} allocations, oracle has {}",
            trace.allocations.len(),
            replay.allocs.len()
        ));
    }
    for (i, (a, o)) in trace.allocations.iter().zip(&replay.allocs).enumerate() {
        let got = Alloc {
            start: a.start,
            init_end: a.init_end,
            end: a.end,
            nodes: a.nodes,
            jobs: a.jobs.clone(),
        };
        if a.id as usize != i || &got != o {
            return Err(format!("allocation {i}: engine {got:?}, oracle {o:?}"));
        }
    }
    for (j, o) in trace.jobs.iter().zip(&replay.jobs) {
        let o = o.ok_or_else(|| format!("oracle never started job {}", j.job_id))?;
        let got = Started {
            dispatch: j.dispatch,
            run_start: j.run_start,
            run_end: j.run_end,
            alloc: j.allocation as usize,
        };
        if got != o {
            return Err(format!("job {}: engine {got:?}, oracle {o:?}", j.job_id));
        }
    }
    let samples: Vec<(Micros, usize)> = trace.queue_samples.iter().map(|s| (s.time, s.queue_len)).collect();
    if samples != replay.queue {
        return Err(format!(
            "queue samples differ: engine {samples:?}, oracle {:?}",
            replay.queue
        ));
    }
    Ok(())
}

/// The policies every instance is checked under.
pub fn oracle_policies() -> Vec<OraclePolicy> {
    vec![
        OraclePolicy::Fcfs,
        OraclePolicy::Easy,
        OraclePolicy::Packet { num: 1, den: 10 },
        OraclePolicy::Packet { num: 1, den: 2 },
        OraclePolicy::Packet { num: 1, den: 1 },
        OraclePolicy::Packet { num: 3, den: 1 },
        OraclePolicy::Packet { num: 1000, den: 1 },
    ]
}
