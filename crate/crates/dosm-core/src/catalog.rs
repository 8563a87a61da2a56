//! Core domain types: services, edge nodes and network-wide constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The validity test every physical quantity here shares: finite and
/// strictly positive (rejects NaN, ±inf, zero and negatives).
pub(crate) fn positive_finite(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Index of an edge node in the topology (dense, `0..num_edges`).
pub type EdgeId = usize;
/// Index of a service in the catalog (dense, `0..num_services`).
pub type ServiceId = usize;
/// Stable vehicle identifier from the mobility trace.
pub type VehicleId = u64;

/// One service type offered at the edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSpec {
    pub id: ServiceId,
    pub name: String,
    /// Maximum tolerable mean service delay, seconds.
    pub delay_threshold_s: f64,
    /// Request payload a vehicle uploads per invocation, bits.
    pub input_bits: f64,
    /// CPU cycles required per input bit.
    pub compute_intensity: f64,
    /// Storage footprint of one instance (transferable instance layer), bytes.
    pub instance_layer_bytes: u64,
    /// Vehicles one instance can serve concurrently.
    pub capacity: u32,
}

/// One roadside edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeNode {
    pub id: EdgeId,
    /// Planar position in meters.
    pub position: (f64, f64),
    /// CPU frequency, Hz (cycles per second).
    pub cpu_hz: f64,
    /// Total storage, bytes.
    pub storage_capacity_bytes: u64,
    /// Storage pre-occupied by workloads outside this placement's
    /// control, bytes.
    pub storage_used_bytes: u64,
}

impl EdgeNode {
    /// Storage still free for service instances given `instance_bytes`
    /// already placed here by this run.
    pub fn free_bytes(&self, instance_bytes: u64) -> i64 {
        self.storage_capacity_bytes as i64 - self.storage_used_bytes as i64 - instance_bytes as i64
    }
}

/// Network-wide constants shared by every delay computation plus the control
/// cadence of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Wireless channel bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Vehicle transmit power, watts.
    pub tx_power_w: f64,
    /// Noise power, watts.
    pub noise_power_w: f64,
    /// Wired edge-to-edge (backhaul) rate, bit/s.
    pub backhaul_bps: f64,
    /// Per-vehicle runtime context that moves with a migration, bytes.
    pub user_context_bytes: f64,
    /// Signal propagation speed, m/s.
    pub propagation_speed_mps: f64,
    /// Slot length, seconds.
    pub slot_seconds: f64,
    /// Total simulated horizon, seconds (multiple of `slot_seconds`).
    pub horizon_seconds: f64,
    /// Slots per prediction/decision frame for the frame-based policy.
    pub frame_slots: usize,
    /// Quality threshold: placements scoring below this need attention.
    pub q_threshold: f64,
    /// Predicted utilization (percent) above which a poor placement is
    /// scaled out rather than migrated.
    pub util_high_pct: f64,
    /// Predicted utilization (percent) below which a healthy service sheds
    /// an instance.
    pub util_low_pct: f64,
    /// Number of edge nodes.
    pub num_edges: usize,
    /// Side of the square region vehicles move in, meters.
    pub region_side_m: f64,
}

impl NetworkConfig {
    /// Number of slots in the horizon.
    pub fn num_slots(&self) -> usize {
        (self.horizon_seconds / self.slot_seconds).round() as usize
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let positive: [(&str, f64); 7] = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("noise_power_w", self.noise_power_w),
            ("backhaul_bps", self.backhaul_bps),
            ("propagation_speed_mps", self.propagation_speed_mps),
            ("slot_seconds", self.slot_seconds),
            ("horizon_seconds", self.horizon_seconds),
        ];
        for (name, value) in positive {
            if !positive_finite(value) {
                return Err(CatalogError::NonPositive { field: name });
            }
        }
        if self.user_context_bytes < 0.0 || !self.user_context_bytes.is_finite() {
            return Err(CatalogError::NonPositive {
                field: "user_context_bytes",
            });
        }
        let slots = self.horizon_seconds / self.slot_seconds;
        if (slots - slots.round()).abs() > 1e-9 || slots.round() < 1.0 {
            return Err(CatalogError::HorizonNotSlotted {
                horizon_s: self.horizon_seconds,
                slot_s: self.slot_seconds,
            });
        }
        if self.frame_slots == 0 {
            return Err(CatalogError::NonPositive {
                field: "frame_slots",
            });
        }
        if self.num_edges == 0 {
            return Err(CatalogError::NonPositive { field: "num_edges" });
        }
        if !positive_finite(self.region_side_m) {
            return Err(CatalogError::NonPositive {
                field: "region_side_m",
            });
        }
        if !(0.0..=1.0).contains(&self.q_threshold) {
            return Err(CatalogError::OutOfRange {
                field: "q_threshold",
                expected: "within [0, 1]",
            });
        }
        for (name, pct) in [
            ("util_high_pct", self.util_high_pct),
            ("util_low_pct", self.util_low_pct),
        ] {
            if !(0.0..=100.0).contains(&pct) {
                return Err(CatalogError::OutOfRange {
                    field: name,
                    expected: "within [0, 100]",
                });
            }
        }
        if self.util_low_pct >= self.util_high_pct {
            return Err(CatalogError::OutOfRange {
                field: "util_low_pct",
                expected: "below util_high_pct",
            });
        }
        Ok(())
    }
}

/// Validate a full catalog: dense ids, positive numbers, sane capacities.
pub fn validate_catalog(services: &[ServiceSpec]) -> Result<(), CatalogError> {
    if services.is_empty() {
        return Err(CatalogError::EmptyCatalog);
    }
    for (i, svc) in services.iter().enumerate() {
        if svc.id != i {
            return Err(CatalogError::NonDenseIds {
                expected: i,
                found: svc.id,
            });
        }
        if svc.name.trim().is_empty() {
            return Err(CatalogError::UnnamedService { id: i });
        }
        let positive: [(&str, f64); 3] = [
            ("delay_threshold_s", svc.delay_threshold_s),
            ("input_bits", svc.input_bits),
            ("compute_intensity", svc.compute_intensity),
        ];
        for (name, value) in positive {
            if !positive_finite(value) {
                return Err(CatalogError::ServiceField {
                    service: svc.name.clone(),
                    field: name,
                });
            }
        }
        if svc.instance_layer_bytes == 0 {
            return Err(CatalogError::ServiceField {
                service: svc.name.clone(),
                field: "instance_layer_bytes",
            });
        }
        if svc.capacity == 0 {
            return Err(CatalogError::ServiceField {
                service: svc.name.clone(),
                field: "capacity",
            });
        }
    }
    Ok(())
}

/// Validate an edge topology against the network config.
pub fn validate_edges(edges: &[EdgeNode], cfg: &NetworkConfig) -> Result<(), CatalogError> {
    if edges.len() != cfg.num_edges {
        return Err(CatalogError::EdgeCountMismatch {
            expected: cfg.num_edges,
            found: edges.len(),
        });
    }
    for (i, edge) in edges.iter().enumerate() {
        if edge.id != i {
            return Err(CatalogError::NonDenseIds {
                expected: i,
                found: edge.id,
            });
        }
        if !positive_finite(edge.cpu_hz) {
            return Err(CatalogError::EdgeField {
                edge: i,
                field: "cpu_hz",
            });
        }
        if edge.storage_capacity_bytes == 0 {
            return Err(CatalogError::EdgeField {
                edge: i,
                field: "storage_capacity_bytes",
            });
        }
        if edge.storage_used_bytes > edge.storage_capacity_bytes {
            return Err(CatalogError::EdgeField {
                edge: i,
                field: "storage_used_bytes",
            });
        }
        if !edge.position.0.is_finite() || !edge.position.1.is_finite() {
            return Err(CatalogError::EdgeField {
                edge: i,
                field: "position",
            });
        }
    }
    Ok(())
}

/// Convert a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog has no services")]
    EmptyCatalog,
    #[error("{field} must be positive")]
    NonPositive { field: &'static str },
    #[error("{field} must be {expected}")]
    OutOfRange {
        field: &'static str,
        expected: &'static str,
    },
    #[error("horizon {horizon_s} s is not a whole number of {slot_s} s slots")]
    HorizonNotSlotted { horizon_s: f64, slot_s: f64 },
    #[error("ids must be dense and ordered: expected {expected}, found {found}")]
    NonDenseIds { expected: usize, found: usize },
    #[error("service {id} has an empty name")]
    UnnamedService { id: ServiceId },
    #[error("service '{service}': {field} must be positive")]
    ServiceField {
        service: String,
        field: &'static str,
    },
    #[error("edge {edge}: invalid {field}")]
    EdgeField { edge: EdgeId, field: &'static str },
    #[error("topology has {found} edges but the network config declares {expected}")]
    EdgeCountMismatch { expected: usize, found: usize },
}
