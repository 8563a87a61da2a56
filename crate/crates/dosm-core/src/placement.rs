//! Replica placement state: how many instances of each service run on each
//! edge, plus a per-service revision counter used to detect stale plans.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{EdgeId, EdgeNode, ServiceId, ServiceSpec};

/// Integer replica counts per (edge, service) with derived bookkeeping.
///
/// Every mutation bumps the touched service's revision; optimizer plans
/// record the revision they were solved against so that applying a plan to a
/// placement that changed underneath is rejected instead of silently
/// corrupting counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    num_edges: usize,
    num_services: usize,
    /// Edge-major: `counts[e * num_services + s]`.
    counts: Vec<u32>,
    instances: Vec<u32>,
    revisions: Vec<u64>,
}

impl Placement {
    pub fn new(num_edges: usize, num_services: usize) -> Self {
        Self {
            num_edges,
            num_services,
            counts: vec![0; num_edges * num_services],
            instances: vec![0; num_services],
            revisions: vec![0; num_services],
        }
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_services(&self) -> usize {
        self.num_services
    }

    pub fn count(&self, edge: EdgeId, service: ServiceId) -> u32 {
        self.counts[edge * self.num_services + service]
    }

    /// Total instances of `service` across all edges.
    pub fn instance_count(&self, service: ServiceId) -> u32 {
        self.instances[service]
    }

    /// Mutation counter for `service`'s replica column.
    pub fn revision(&self, service: ServiceId) -> u64 {
        self.revisions[service]
    }

    /// Replica counts of `service` on every edge (indexed by edge id).
    pub fn column(&self, service: ServiceId) -> Vec<u32> {
        (0..self.num_edges)
            .map(|e| self.count(e, service))
            .collect()
    }

    /// Edges hosting at least one instance of `service`, ascending id.
    pub fn hosting_edges(&self, service: ServiceId) -> Vec<EdgeId> {
        (0..self.num_edges)
            .filter(|&e| self.count(e, service) > 0)
            .collect()
    }

    pub fn add_instance(&mut self, edge: EdgeId, service: ServiceId) {
        self.counts[edge * self.num_services + service] += 1;
        self.instances[service] += 1;
        self.revisions[service] += 1;
    }

    pub fn remove_instance(
        &mut self,
        edge: EdgeId,
        service: ServiceId,
    ) -> Result<(), PlacementError> {
        let slot = edge * self.num_services + service;
        if self.counts[slot] == 0 {
            return Err(PlacementError::NoInstanceAt { edge, service });
        }
        self.counts[slot] -= 1;
        self.instances[service] -= 1;
        self.revisions[service] += 1;
        Ok(())
    }

    /// Bytes of instance layers this placement stores on `edge`.
    pub fn instance_bytes_on(&self, edge: EdgeId, services: &[ServiceSpec]) -> u64 {
        services
            .iter()
            .map(|svc| u64::from(self.count(edge, svc.id)) * svc.instance_layer_bytes)
            .sum()
    }

    /// Total occupied bytes on `edge`: pre-occupied background plus this
    /// placement's instances.
    pub fn occupied_bytes(&self, edge: &EdgeNode, services: &[ServiceSpec]) -> u64 {
        edge.storage_used_bytes + self.instance_bytes_on(edge.id, services)
    }

    /// Check internal consistency (column sums match the per-service totals
    /// and nothing exceeds storage).
    pub fn validate(
        &self,
        edges: &[EdgeNode],
        services: &[ServiceSpec],
    ) -> Result<(), PlacementError> {
        for s in 0..self.num_services {
            let total: u32 = (0..self.num_edges).map(|e| self.count(e, s)).sum();
            if total != self.instances[s] {
                return Err(PlacementError::CountDrift {
                    service: s,
                    column_sum: total,
                    tracked: self.instances[s],
                });
            }
        }
        for edge in edges {
            let used = self.occupied_bytes(edge, services);
            if used > edge.storage_capacity_bytes {
                return Err(PlacementError::StorageOverflow {
                    edge: edge.id,
                    used_bytes: used,
                    capacity_bytes: edge.storage_capacity_bytes,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error("no instance of service {service} on edge {edge} to remove")]
    NoInstanceAt { edge: EdgeId, service: ServiceId },
    #[error("service {service} bookkeeping drifted: column sums to {column_sum}, tracked total is {tracked}")]
    CountDrift {
        service: ServiceId,
        column_sum: u32,
        tracked: u32,
    },
    #[error("edge {edge} stores {used_bytes} B which exceeds its {capacity_bytes} B capacity")]
    StorageOverflow {
        edge: EdgeId,
        used_bytes: u64,
        capacity_bytes: u64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_remove_roundtrip() {
        let mut p = Placement::new(3, 2);
        p.add_instance(1, 0);
        p.add_instance(1, 0);
        p.add_instance(2, 1);
        assert_eq!(p.count(1, 0), 2);
        assert_eq!(p.instance_count(0), 2);
        assert_eq!(p.hosting_edges(0), vec![1]);
        assert_eq!(p.hosting_edges(1), vec![2]);
        p.remove_instance(1, 0).unwrap();
        assert_eq!(p.count(1, 0), 1);
        assert_eq!(p.instance_count(0), 1);
    }

    #[test]
    fn remove_from_empty_edge_fails() {
        let mut p = Placement::new(2, 1);
        p.add_instance(0, 0);
        assert!(matches!(
            p.remove_instance(1, 0),
            Err(PlacementError::NoInstanceAt {
                edge: 1,
                service: 0
            })
        ));
    }

    #[test]
    fn revisions_track_mutations_per_service() {
        let mut p = Placement::new(2, 2);
        assert_eq!(p.revision(0), 0);
        p.add_instance(0, 0);
        p.add_instance(1, 0);
        p.add_instance(0, 1);
        assert_eq!(p.revision(0), 2);
        assert_eq!(p.revision(1), 1);
        p.remove_instance(1, 0).unwrap();
        assert_eq!(p.revision(0), 3);
        assert_eq!(p.revision(1), 1);
    }
}
