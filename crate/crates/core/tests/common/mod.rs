//! Shared test support: an independent replay oracle, deterministic instance
//! enumeration and small statistics helpers.

#![allow(dead_code)]

pub mod oracle;
pub mod stats;

use packetsim_core::{Job, Micros, MICROS_PER_SEC};

pub const SEC: Micros = MICROS_PER_SEC;

/// A small cluster with a handful of jobs.
#[derive(Debug, Clone)]
pub struct Instance {
    pub nodes: u32,
    pub jobs: Vec<Job>,
}

/// SplitMix64; enough to spread deterministic choices over a palette.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[(self.next() % xs.len() as u64) as usize]
    }
}

/// Every combination of 1..=4 nodes and 1..=5 jobs, `variants` instances
/// each: up to two types, submit gaps, runtimes and requests drawn from small
/// palettes so that ties, simultaneous events and backfill holes are common.
/// All jobs of an instance share one init time (0, 1 or 2 s).
pub fn enumerate_instances(variants: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    for nodes in 1..=4u32 {
        for n_jobs in 1..=5u64 {
            for v in 0..variants {
                let mut mix = Mix(nodes as u64 * 1_000_003 + n_jobs * 10_007 + v);
                let init = [0, SEC, 2 * SEC][(v % 3) as usize];
                let reqs: Vec<u32> = (1..=nodes).collect();
                let mut submit = 0;
                let jobs = (0..n_jobs)
                    .map(|id| {
                        submit += mix.pick(&[0, 0, SEC, 2 * SEC, 5 * SEC]);
                        let runtime = mix.pick(&[SEC, 2 * SEC, 3 * SEC, 7 * SEC]);
                        let req = mix.pick(&reqs);
                        let type_id = mix.pick(&[0, 1]);
                        Job::new(id, submit, runtime, req, type_id, init)
                    })
                    .collect();
                out.push(Instance { nodes, jobs });
            }
        }
    }
    out
}
