use std::collections::BTreeMap;

use crate::job::Micros;
use crate::sim::SimError;

pub type AllocationId = u64;

/// Nodes held by one dispatched group (or single job) between `start` and `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Allocation {
    pub id: AllocationId,
    pub nodes: u32,
    pub start: Micros,
    pub end: Micros,
}

/// Space-shared pool of identical nodes.
#[derive(Debug, Clone)]
pub struct ClusterState {
    total_nodes: u32,
    free_nodes: u32,
    running: BTreeMap<AllocationId, Allocation>,
    next_id: AllocationId,
}

impl ClusterState {
    pub fn new(total_nodes: u32) -> Result<Self, SimError> {
        if total_nodes == 0 {
            return Err(SimError::EmptyCluster);
        }
        Ok(ClusterState {
            total_nodes,
            free_nodes: total_nodes,
            running: BTreeMap::new(),
            next_id: 0,
        })
    }

    pub fn total_nodes(&self) -> u32 {
        self.total_nodes
    }

    pub fn free_nodes(&self) -> u32 {
        self.free_nodes
    }

    pub fn busy_nodes(&self) -> u32 {
        self.running.values().map(|a| a.nodes).sum()
    }

    /// Active allocations in id order.
    pub fn running(&self) -> impl Iterator<Item = &Allocation> {
        self.running.values()
    }

    /// Reserves `nodes` nodes for `[start, end)`.
    pub fn allocate(&mut self, nodes: u32, start: Micros, end: Micros) -> Result<AllocationId, SimError> {
        if nodes == 0 || nodes > self.free_nodes {
            return Err(SimError::OverAllocation {
                requested: nodes,
                free: self.free_nodes,
            });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.free_nodes -= nodes;
        self.running.insert(id, Allocation { id, nodes, start, end });
        debug_assert!(self.conserved());
        Ok(id)
    }

    pub fn release(&mut self, id: AllocationId) -> Result<Allocation, SimError> {
        let alloc = self.running.remove(&id).ok_or(SimError::UnknownAllocation(id))?;
        self.free_nodes += alloc.nodes;
        debug_assert!(self.conserved());
        Ok(alloc)
    }

    /// `free + busy == total`.
    pub fn conserved(&self) -> bool {
        self.free_nodes + self.busy_nodes() == self.total_nodes
    }
}
