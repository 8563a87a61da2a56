//! Delay models: wireless access rate, per-request service delay and
//! instance migration delay, plus the canonical vehicle-to-instance
//! assignment used everywhere a placement is evaluated.
//!
//! The arithmetic here is deliberately written as a fixed sequence of f64
//! operations (no fused multiply-add, no reordering) so that results are
//! bit-for-bit reproducible across runs and platforms.

use thiserror::Error;

use crate::catalog::{EdgeId, EdgeNode, NetworkConfig, ServiceId, ServiceSpec, VehicleId};
use crate::placement::Placement;
use crate::trace::ActiveVehicle;

/// Distances shorter than this are clamped to avoid the pathloss pole.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Euclidean distance clamped to [`MIN_DISTANCE_M`].
pub fn floored_distance_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    let d = (dx * dx + dy * dy).sqrt();
    d.max(MIN_DISTANCE_M)
}

/// Shannon-style uplink rate (bit/s) with inverse-square pathloss at
/// `dist_m` meters: `W * log2(1 + (P / N) / d^2)`.
pub fn access_rate_bps(dist_m: f64, cfg: &NetworkConfig) -> f64 {
    let d = dist_m.max(MIN_DISTANCE_M);
    let snr = (cfg.tx_power_w / cfg.noise_power_w) / (d * d);
    cfg.bandwidth_hz * (1.0 + snr).log2()
}

/// The three additive components of one request's service delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown {
    pub prop_s: f64,
    pub trans_s: f64,
    pub comp_s: f64,
}

impl DelayBreakdown {
    pub fn total_s(&self) -> f64 {
        self.prop_s + self.trans_s + self.comp_s
    }
}

/// Delay for one vehicle at `pos` requesting `svc` from an instance on
/// `edge`: signal propagation + payload transmission + computation.
pub fn service_delay(
    pos: (f64, f64),
    edge: &EdgeNode,
    svc: &ServiceSpec,
    cfg: &NetworkConfig,
) -> DelayBreakdown {
    let d = floored_distance_m(pos, edge.position);
    let rate = access_rate_bps(d, cfg);
    DelayBreakdown {
        prop_s: d / cfg.propagation_speed_mps,
        trans_s: svc.input_bits / rate,
        comp_s: svc.input_bits * svc.compute_intensity / edge.cpu_hz,
    }
}

/// Time to move one instance plus the runtime context of `users` vehicles
/// over the backhaul.
pub fn migration_delay_s(svc: &ServiceSpec, users: u32, cfg: &NetworkConfig) -> f64 {
    let bytes = svc.instance_layer_bytes as f64 + cfg.user_context_bytes * f64::from(users);
    bytes * 8.0 / cfg.backhaul_bps
}

// ── Canonical assignment ────────────────────────────────────────────────

/// How one service's vehicles were served under some replica column.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceAssignment {
    /// Mean delay over this service's vehicles (0.0 when none).
    pub mean_delay_s: f64,
    /// Chosen edge per vehicle, parallel to the input order.
    pub assigned: Vec<EdgeId>,
    /// Vehicles admitted beyond seat capacity because every instance was
    /// full; they are still served at their best edge.
    pub overflow: u32,
}

/// Assign each vehicle of one service to a hosting edge and compute the mean
/// delay. This is the single admission rule shared by the simulator and
/// every optimizer candidate evaluation:
///
/// 1. each vehicle ranks hosting edges by (delay asc, edge id asc);
/// 2. vehicles are admitted in order of (their best delay asc, id asc);
/// 3. a vehicle takes its best-ranked edge with a free seat
///    (`count * capacity` seats per edge), falling back to its overall best
///    edge when everything is full.
///
/// `column[e]` is the instance count of the service on edge `e`; `vehicles`
/// must be ordered by ascending vehicle id.
pub fn assign_for_service(
    column: &[u32],
    vehicles: &[(VehicleId, (f64, f64))],
    svc: &ServiceSpec,
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
) -> Result<ServiceAssignment, DelayError> {
    if vehicles.is_empty() {
        return Ok(ServiceAssignment {
            mean_delay_s: 0.0,
            assigned: Vec::new(),
            overflow: 0,
        });
    }
    let hosts: Vec<EdgeId> = (0..edges.len()).filter(|&e| column[e] > 0).collect();
    if hosts.is_empty() {
        return Err(DelayError::NoInstances { service: svc.id });
    }

    // Delay of every vehicle to every hosting edge, and per-vehicle host
    // ranking by (delay, edge id).
    let mut delays = vec![0.0; vehicles.len() * hosts.len()];
    let mut ranking: Vec<Vec<usize>> = Vec::with_capacity(vehicles.len());
    for (vi, (_, pos)) in vehicles.iter().enumerate() {
        for (hi, &e) in hosts.iter().enumerate() {
            delays[vi * hosts.len() + hi] = service_delay(*pos, &edges[e], svc, cfg).total_s();
        }
        let mut order: Vec<usize> = (0..hosts.len()).collect();
        order.sort_by(|&a, &b| {
            let da = delays[vi * hosts.len() + a];
            let db = delays[vi * hosts.len() + b];
            da.partial_cmp(&db)
                .expect("finite delays")
                .then(hosts[a].cmp(&hosts[b]))
        });
        ranking.push(order);
    }

    // Admission order: best achievable delay first, vehicle id breaking ties.
    let mut admission: Vec<usize> = (0..vehicles.len()).collect();
    admission.sort_by(|&a, &b| {
        let da = delays[a * hosts.len() + ranking[a][0]];
        let db = delays[b * hosts.len() + ranking[b][0]];
        da.partial_cmp(&db)
            .expect("finite delays")
            .then(vehicles[a].0.cmp(&vehicles[b].0))
    });

    let mut seats: Vec<i64> = hosts
        .iter()
        .map(|&e| i64::from(column[e]) * i64::from(svc.capacity))
        .collect();
    let mut assigned = vec![0; vehicles.len()];
    let mut overflow = 0;
    for &vi in &admission {
        let slot = ranking[vi].iter().copied().find(|&hi| seats[hi] > 0);
        let hi = match slot {
            Some(hi) => {
                seats[hi] -= 1;
                hi
            }
            None => {
                overflow += 1;
                ranking[vi][0]
            }
        };
        assigned[vi] = hosts[hi];
    }

    // Mean in input (vehicle id) order for a fixed summation order.
    let mut sum = 0.0;
    for (vi, _) in vehicles.iter().enumerate() {
        let hi = hosts
            .iter()
            .position(|&e| e == assigned[vi])
            .expect("assigned host");
        sum += delays[vi * hosts.len() + hi];
    }
    Ok(ServiceAssignment {
        mean_delay_s: sum / vehicles.len() as f64,
        assigned,
        overflow,
    })
}

/// Per-service serving outcome for a whole slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceServe {
    pub vehicles: u32,
    /// Mean delay over this service's vehicles; 0.0 when it had none.
    pub mean_delay_s: f64,
    pub overflow: u32,
}

/// Slot-level serving outcome across all services.
#[derive(Debug, Clone, PartialEq)]
pub struct ServeReport {
    /// Mean delay over every served vehicle (0.0 when none were active).
    pub overall_mean_s: f64,
    pub per_service: Vec<ServiceServe>,
}

/// Serve every active vehicle under `placement` and report delays.
pub fn serve_slot(
    active: &[ActiveVehicle],
    placement: &Placement,
    edges: &[EdgeNode],
    services: &[ServiceSpec],
    cfg: &NetworkConfig,
) -> Result<ServeReport, DelayError> {
    let mut per_service = Vec::with_capacity(services.len());
    let mut total_sum = 0.0;
    let mut total_count = 0u32;
    for svc in services {
        let vehicles: Vec<(VehicleId, (f64, f64))> = active
            .iter()
            .filter(|v| v.service == svc.id)
            .map(|v| (v.id, v.pos))
            .collect();
        if vehicles.is_empty() {
            per_service.push(ServiceServe {
                vehicles: 0,
                mean_delay_s: 0.0,
                overflow: 0,
            });
            continue;
        }
        let column = placement.column(svc.id);
        let assignment = assign_for_service(&column, &vehicles, svc, edges, cfg)?;
        total_sum += assignment.mean_delay_s * vehicles.len() as f64;
        total_count += vehicles.len() as u32;
        per_service.push(ServiceServe {
            vehicles: vehicles.len() as u32,
            mean_delay_s: assignment.mean_delay_s,
            overflow: assignment.overflow,
        });
    }
    let overall_mean_s = if total_count > 0 {
        total_sum / f64::from(total_count)
    } else {
        0.0
    };
    Ok(ServeReport {
        overall_mean_s,
        per_service,
    })
}

/// Mean delay of one service's vehicles under a hypothetical replica
/// `column` — the optimizer's objective evaluation.
pub fn mean_delay_for_column(
    column: &[u32],
    vehicles: &[(VehicleId, (f64, f64))],
    svc: &ServiceSpec,
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
) -> Result<f64, DelayError> {
    Ok(assign_for_service(column, vehicles, svc, edges, cfg)?.mean_delay_s)
}

#[derive(Debug, Error)]
pub enum DelayError {
    #[error("service {service} has demand but no instances")]
    NoInstances { service: ServiceId },
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> NetworkConfig {
        NetworkConfig {
            bandwidth_hz: 1e6,
            tx_power_w: 10.0,     // 40 dBm
            noise_power_w: 1e-13, // -100 dBm
            backhaul_bps: 1e9,
            user_context_bytes: 1e6,
            propagation_speed_mps: 3e8,
            slot_seconds: 5.0,
            horizon_seconds: 750.0,
            frame_slots: 15,
            q_threshold: 0.5,
            util_high_pct: 90.0,
            util_low_pct: 30.0,
            num_edges: 9,
            region_side_m: 15_000.0,
        }
    }

    fn edge(id: EdgeId, x: f64, y: f64) -> EdgeNode {
        EdgeNode {
            id,
            position: (x, y),
            cpu_hz: 1e10,
            storage_capacity_bytes: 2_000_000_000,
            storage_used_bytes: 0,
        }
    }

    fn svc() -> ServiceSpec {
        ServiceSpec {
            id: 0,
            name: "Emergency Stop".into(),
            delay_threshold_s: 0.1,
            input_bits: 3200.0,
            compute_intensity: 36_000.0,
            instance_layer_bytes: 100_000_000,
            capacity: 30,
        }
    }

    #[test]
    fn access_rate_at_1km() {
        // SNR = (10 / 1e-13) / 1e6 = 1e8, rate = 1e6 * log2(1 + 1e8).
        let rate = access_rate_bps(1000.0, &cfg());
        let expected = 1e6 * (1.0 + 1e8f64).log2();
        assert_eq!(rate, expected);
        assert_relative_eq!(rate, 2.657542e7, max_relative = 1e-6);
    }

    #[test]
    fn access_rate_monotonically_decreases_with_distance() {
        let c = cfg();
        let mut last = f64::INFINITY;
        for d in [1.0, 10.0, 100.0, 1000.0, 3000.0] {
            let r = access_rate_bps(d, &c);
            assert!(r < last);
            last = r;
        }
        // The floor makes anything below 1 m behave like 1 m.
        assert_eq!(access_rate_bps(0.0, &c), access_rate_bps(1.0, &c));
        assert_eq!(access_rate_bps(0.5, &c), access_rate_bps(1.0, &c));
    }

    #[test]
    fn computation_delay_frozen_value() {
        // 3200 bit * 36000 cycle/bit / 1e10 Hz = 1.152e-2 s.
        let d = service_delay((0.0, 0.0), &edge(0, 0.0, 0.0), &svc(), &cfg());
        assert!((d.comp_s - 1.152e-2).abs() < 1e-12);
    }

    #[test]
    fn transmission_delay_frozen_value_at_1km() {
        let mut s = svc();
        s.input_bits = 4800.0;
        let d = service_delay((1000.0, 0.0), &edge(0, 0.0, 0.0), &s, &cfg());
        // 4800 bit / 2.6575e7 bit/s ≈ 1.8062e-4 s.
        assert_relative_eq!(d.trans_s, 1.80618e-4, max_relative = 1e-4);
        assert_relative_eq!(d.prop_s, 1000.0 / 3e8, max_relative = 1e-12);
    }

    #[test]
    fn migration_delay_frozen_value() {
        // (100 MB + 30 * 1 MB) * 8 bit/B / 1 Gbit/s = 1.04 s.
        let t = migration_delay_s(&svc(), 30, &cfg());
        assert!((t - 1.04).abs() < 1e-9);
    }

    #[test]
    fn assignment_prefers_nearest_with_capacity() {
        let c = cfg();
        let s = svc();
        let edges = vec![edge(0, 0.0, 0.0), edge(1, 2000.0, 0.0)];
        let vehicles: Vec<(VehicleId, (f64, f64))> = (0..4)
            .map(|i| (i as VehicleId, (10.0 * f64::from(i), 0.0)))
            .collect();
        let a = assign_for_service(&[1, 1], &vehicles, &s, &edges, &c).unwrap();
        assert_eq!(a.assigned, vec![0, 0, 0, 0]);
        assert_eq!(a.overflow, 0);
    }

    #[test]
    fn assignment_spills_to_next_edge_when_full() {
        let c = cfg();
        let mut s = svc();
        s.capacity = 2;
        let edges = vec![edge(0, 0.0, 0.0), edge(1, 2000.0, 0.0)];
        let vehicles: Vec<(VehicleId, (f64, f64))> = (0..3)
            .map(|i| (i as VehicleId, (10.0 * f64::from(i), 0.0)))
            .collect();
        let a = assign_for_service(&[1, 1], &vehicles, &s, &edges, &c).unwrap();
        // Two nearest vehicles fill edge 0; the third spills to edge 1.
        assert_eq!(a.assigned.iter().filter(|&&e| e == 0).count(), 2);
        assert_eq!(a.assigned.iter().filter(|&&e| e == 1).count(), 1);
        assert_eq!(a.overflow, 0);
    }

    #[test]
    fn assignment_overflows_when_everything_full() {
        let c = cfg();
        let mut s = svc();
        s.capacity = 1;
        let edges = vec![edge(0, 0.0, 0.0), edge(1, 2000.0, 0.0)];
        let vehicles: Vec<(VehicleId, (f64, f64))> = (0..3)
            .map(|i| (i as VehicleId, (10.0 * f64::from(i), 0.0)))
            .collect();
        let a = assign_for_service(&[1, 1], &vehicles, &s, &edges, &c).unwrap();
        assert_eq!(a.overflow, 1);
        // The overflowed vehicle is still served at its best edge.
        assert_eq!(a.assigned.len(), 3);
    }

    #[test]
    fn no_instances_is_an_error() {
        let c = cfg();
        let s = svc();
        let edges = vec![edge(0, 0.0, 0.0)];
        let vehicles = vec![(0, (0.0, 0.0))];
        assert!(matches!(
            assign_for_service(&[0], &vehicles, &s, &edges, &c),
            Err(DelayError::NoInstances { service: 0 })
        ));
    }

    #[test]
    fn empty_demand_means_zero_delay() {
        let a = assign_for_service(&[1], &[], &svc(), &[edge(0, 0.0, 0.0)], &cfg()).unwrap();
        assert_eq!(a.mean_delay_s, 0.0);
    }
}
