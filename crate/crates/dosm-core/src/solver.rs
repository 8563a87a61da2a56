//! Exact placement solvers by exhaustive candidate enumeration.
//!
//! Each solve considers one service against the current placement and the
//! current slot's demand:
//!
//! - MIGRATE enumerates every (source instance edge, target edge ≠ source)
//!   pair — at most |E|² candidates — and minimizes resulting mean service
//!   delay plus the migration (link) delay, subject to the delay threshold
//!   on the resulting mean, target storage capacity (instance layer plus
//!   transferred user context), and the one-slot bound on migration delay.
//! - SCALE_OUT enumerates only edges already hosting the service and adds
//!   one instance where the resulting mean delay is lowest, subject to the
//!   threshold and the extra instance's storage.
//! - SCALE_IN (requires ≥ 2 instances) removes the instance whose absence
//!   keeps the mean delay lowest, subject to the threshold.
//!
//! Ties break toward lower edge ids (for MIGRATE: lower source, then lower
//! target). Infeasible solves return an empty plan rather than an error so
//! the control loop can keep the old placement and log it. `apply_plan`
//! guards against stale plans via the placement's per-service revision
//! counter and re-checks storage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{EdgeId, EdgeNode, NetworkConfig, ServiceId, ServiceSpec, VehicleId};
use crate::delay::{mean_delay_for_column, migration_delay_s, service_delay, DelayError};
use crate::placement::{Placement, PlacementError};
use crate::trace::{ActiveVehicle, DemandMatrix};

/// Outcome of one solver invocation. `plan` is `None` when every candidate
/// violated a constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<P> {
    pub plan: Option<P>,
    pub candidates_evaluated: u32,
    pub candidates_feasible: u32,
}

/// Move one instance of `service` from `source_edge` to `target_edge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigratePlan {
    pub service: ServiceId,
    pub source_edge: EdgeId,
    pub target_edge: EdgeId,
    /// Resulting mean service delay plus migration delay (seconds).
    pub objective_value: f64,
    /// Mean service delay under the candidate placement alone.
    pub candidate_mean_delay_s: f64,
    pub migration_delay_s: f64,
    /// Vehicles whose context transfers with the instance (demand at the
    /// source edge when the plan was made).
    pub users_moved: u32,
    /// Placement revision the plan was computed against.
    pub base_revision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleDirection {
    Out,
    In,
}

/// Add (`Out`) or remove (`In`) one instance of `service` at `edge`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePlan {
    pub service: ServiceId,
    pub edge: EdgeId,
    pub direction: ScaleDirection,
    /// Resulting mean service delay (seconds).
    pub objective_value: f64,
    pub base_revision: u64,
}

/// Any applicable plan, for uniform application and logging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlacementPlan {
    Migrate(MigratePlan),
    Scale(ScalePlan),
}

impl PlacementPlan {
    pub fn service(&self) -> ServiceId {
        match self {
            PlacementPlan::Migrate(p) => p.service,
            PlacementPlan::Scale(p) => p.service,
        }
    }

    pub fn base_revision(&self) -> u64 {
        match self {
            PlacementPlan::Migrate(p) => p.base_revision,
            PlacementPlan::Scale(p) => p.base_revision,
        }
    }

    pub fn objective_value(&self) -> f64 {
        match self {
            PlacementPlan::Migrate(p) => p.objective_value,
            PlacementPlan::Scale(p) => p.objective_value,
        }
    }
}

/// Positions of the vehicles requesting `service`, in input order.
fn service_vehicles(active: &[ActiveVehicle], service: ServiceId) -> Vec<(VehicleId, (f64, f64))> {
    active
        .iter()
        .filter(|v| v.service == service)
        .map(|v| (v.id, v.pos))
        .collect()
}

fn check_service(service: ServiceId, services: &[ServiceSpec]) -> Result<(), SolverError> {
    if service >= services.len() {
        return Err(SolverError::UnknownService { service });
    }
    Ok(())
}

/// Find the cheapest feasible single-instance migration for `service`.
pub fn solve_migrate(
    service: ServiceId,
    placement: &Placement,
    demand: &DemandMatrix,
    active: &[ActiveVehicle],
    cfg: &NetworkConfig,
    edges: &[EdgeNode],
    services: &[ServiceSpec],
) -> Result<SolveReport<MigratePlan>, SolverError> {
    check_service(service, services)?;
    let svc = &services[service];
    let column = placement.column(service);
    let sources = placement.hosting_edges(service);
    if sources.is_empty() {
        return Err(SolverError::NoInstances { service });
    }
    let vehicles = service_vehicles(active, service);
    let mut evaluated = 0;
    let mut feasible = 0;
    let mut best: Option<MigratePlan> = None;
    for &source in &sources {
        let users = demand.count(source, service);
        let t_m = migration_delay_s(svc, users, cfg);
        for (target, edge) in edges.iter().enumerate() {
            if target == source {
                continue;
            }
            evaluated += 1;
            // One-slot bound on the migration itself.
            if t_m > cfg.slot_seconds {
                continue;
            }
            // Target storage: instance layer plus transferred context.
            let occupied = placement.occupied_bytes(edge, services) as f64;
            let added = svc.instance_layer_bytes as f64 + cfg.user_context_bytes * f64::from(users);
            if occupied + added > edge.storage_capacity_bytes as f64 {
                continue;
            }
            let mut candidate = column.clone();
            candidate[source] -= 1;
            candidate[target] += 1;
            let mean = mean_delay_for_column(&candidate, &vehicles, svc, edges, cfg)?;
            if mean > svc.delay_threshold_s {
                continue;
            }
            feasible += 1;
            let objective = mean + t_m;
            let better = match &best {
                None => true,
                Some(b) => objective < b.objective_value,
            };
            if better {
                best = Some(MigratePlan {
                    service,
                    source_edge: source,
                    target_edge: target,
                    objective_value: objective,
                    candidate_mean_delay_s: mean,
                    migration_delay_s: t_m,
                    users_moved: users,
                    base_revision: placement.revision(service),
                });
            }
        }
    }
    Ok(SolveReport {
        plan: best,
        candidates_evaluated: evaluated,
        candidates_feasible: feasible,
    })
}

/// Find the best hosting edge for one additional instance of `service`.
pub fn solve_scale_out(
    service: ServiceId,
    placement: &Placement,
    _demand: &DemandMatrix,
    active: &[ActiveVehicle],
    cfg: &NetworkConfig,
    edges: &[EdgeNode],
    services: &[ServiceSpec],
) -> Result<SolveReport<ScalePlan>, SolverError> {
    check_service(service, services)?;
    let svc = &services[service];
    let column = placement.column(service);
    let hosts = placement.hosting_edges(service);
    if hosts.is_empty() {
        return Err(SolverError::NoInstances { service });
    }
    let vehicles = service_vehicles(active, service);
    let mut evaluated = 0;
    let mut feasible = 0;
    let mut best: Option<ScalePlan> = None;
    for &host in &hosts {
        evaluated += 1;
        let edge = &edges[host];
        let occupied = placement.occupied_bytes(edge, services);
        if occupied + svc.instance_layer_bytes > edge.storage_capacity_bytes {
            continue;
        }
        let mut candidate = column.clone();
        candidate[host] += 1;
        let mean = mean_delay_for_column(&candidate, &vehicles, svc, edges, cfg)?;
        if mean > svc.delay_threshold_s {
            continue;
        }
        feasible += 1;
        let better = match &best {
            None => true,
            Some(b) => mean < b.objective_value,
        };
        if better {
            best = Some(ScalePlan {
                service,
                edge: host,
                direction: ScaleDirection::Out,
                objective_value: mean,
                base_revision: placement.revision(service),
            });
        }
    }
    Ok(SolveReport {
        plan: best,
        candidates_evaluated: evaluated,
        candidates_feasible: feasible,
    })
}

/// Find the instance of `service` whose removal keeps the mean delay
/// lowest. Requires at least two running instances.
pub fn solve_scale_in(
    service: ServiceId,
    placement: &Placement,
    _demand: &DemandMatrix,
    active: &[ActiveVehicle],
    cfg: &NetworkConfig,
    edges: &[EdgeNode],
    services: &[ServiceSpec],
) -> Result<SolveReport<ScalePlan>, SolverError> {
    check_service(service, services)?;
    let svc = &services[service];
    let instances = placement.instance_count(service);
    if instances < 2 {
        return Err(SolverError::TooFewInstances { service, instances });
    }
    let column = placement.column(service);
    let vehicles = service_vehicles(active, service);
    let mut evaluated = 0;
    let mut feasible = 0;
    let mut best: Option<ScalePlan> = None;
    for host in placement.hosting_edges(service) {
        evaluated += 1;
        let mut candidate = column.clone();
        candidate[host] -= 1;
        let mean = mean_delay_for_column(&candidate, &vehicles, svc, edges, cfg)?;
        if mean > svc.delay_threshold_s {
            continue;
        }
        feasible += 1;
        let better = match &best {
            None => true,
            Some(b) => mean < b.objective_value,
        };
        if better {
            best = Some(ScalePlan {
                service,
                edge: host,
                direction: ScaleDirection::In,
                objective_value: mean,
                base_revision: placement.revision(service),
            });
        }
    }
    Ok(SolveReport {
        plan: best,
        candidates_evaluated: evaluated,
        candidates_feasible: feasible,
    })
}

/// Apply a plan in place. Rejects plans computed against an older revision
/// of the service's column and re-checks storage before mutating.
pub fn apply_plan(
    placement: &mut Placement,
    plan: &PlacementPlan,
    cfg: &NetworkConfig,
    edges: &[EdgeNode],
    services: &[ServiceSpec],
) -> Result<(), SolverError> {
    let service = plan.service();
    check_service(service, services)?;
    let current = placement.revision(service);
    if plan.base_revision() != current {
        return Err(SolverError::StalePlan {
            service,
            plan_revision: plan.base_revision(),
            current_revision: current,
        });
    }
    let svc = &services[service];
    match plan {
        PlacementPlan::Migrate(p) => {
            let edge = &edges[p.target_edge];
            let occupied = placement.occupied_bytes(edge, services) as f64;
            let added =
                svc.instance_layer_bytes as f64 + cfg.user_context_bytes * f64::from(p.users_moved);
            if occupied + added > edge.storage_capacity_bytes as f64 {
                return Err(SolverError::StorageExceeded {
                    edge: p.target_edge,
                });
            }
            placement.remove_instance(p.source_edge, service)?;
            placement.add_instance(p.target_edge, service);
        }
        PlacementPlan::Scale(p) => match p.direction {
            ScaleDirection::Out => {
                let edge = &edges[p.edge];
                let occupied = placement.occupied_bytes(edge, services);
                if occupied + svc.instance_layer_bytes > edge.storage_capacity_bytes {
                    return Err(SolverError::StorageExceeded { edge: p.edge });
                }
                placement.add_instance(p.edge, service);
            }
            ScaleDirection::In => {
                let instances = placement.instance_count(service);
                if instances < 2 {
                    return Err(SolverError::TooFewInstances { service, instances });
                }
                placement.remove_instance(p.edge, service)?;
            }
        },
    }
    Ok(())
}

/// Vehicles disrupted by an applied migration: the demand at the plan's
/// source edge for its service.
pub fn impacted_vehicles(plan: &MigratePlan, demand: &DemandMatrix) -> u32 {
    demand.count(plan.source_edge, plan.service)
}

/// Greedy initial placement: services in descending instance-layer order
/// (ties toward lower id), each instance to the storage-feasible edge that
/// lexicographically minimizes (resulting maximum storage fraction across
/// all edges, expected delay to a uniform probe grid, edge id).
pub fn initial_placement(
    services: &[ServiceSpec],
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
    instances_per_service: u32,
    _seed: u64,
) -> Result<Placement, SolverError> {
    let mut placement = Placement::new(edges.len(), services.len());
    let probes = probe_grid(cfg, 5);
    let mut order: Vec<&ServiceSpec> = services.iter().collect();
    order.sort_by(|a, b| {
        b.instance_layer_bytes
            .cmp(&a.instance_layer_bytes)
            .then(a.id.cmp(&b.id))
    });
    for svc in order {
        // Mean delay from each probe point to each edge, fixed per service.
        let expected_delay: Vec<f64> = edges
            .iter()
            .map(|edge| {
                probes
                    .iter()
                    .map(|&p| service_delay(p, edge, svc, cfg).total_s())
                    .sum::<f64>()
                    / probes.len() as f64
            })
            .collect();
        for _ in 0..instances_per_service {
            let mut best: Option<(f64, f64, EdgeId)> = None;
            for edge in edges {
                let occupied = placement.occupied_bytes(edge, services);
                if occupied + svc.instance_layer_bytes > edge.storage_capacity_bytes {
                    continue;
                }
                let usage_after = edges
                    .iter()
                    .map(|other| {
                        let mut bytes = placement.occupied_bytes(other, services);
                        if other.id == edge.id {
                            bytes += svc.instance_layer_bytes;
                        }
                        bytes as f64 / other.storage_capacity_bytes as f64
                    })
                    .fold(0.0_f64, f64::max);
                let key = (usage_after, expected_delay[edge.id], edge.id);
                let better = match &best {
                    None => true,
                    Some(b) => key < *b,
                };
                if better {
                    best = Some(key);
                }
            }
            match best {
                Some((_, _, edge)) => placement.add_instance(edge, svc.id),
                None => {
                    let max_free = edges
                        .iter()
                        .map(|e| {
                            e.storage_capacity_bytes
                                .saturating_sub(placement.occupied_bytes(e, services))
                        })
                        .max()
                        .unwrap_or(0);
                    return Err(SolverError::InitialPlacementInfeasible {
                        service: svc.name.clone(),
                        needed_bytes: svc.instance_layer_bytes,
                        max_free_bytes: max_free,
                    });
                }
            }
        }
    }
    Ok(placement)
}

/// Uniform `n x n` grid of probe points at cell centers of the region.
fn probe_grid(cfg: &NetworkConfig, n: usize) -> Vec<(f64, f64)> {
    let cell = cfg.region_side_m / n as f64;
    let mut points = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            points.push(((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell));
        }
    }
    points
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("service {service} has no placed instances")]
    NoInstances { service: ServiceId },
    #[error("service {service} has {instances} instance(s); scale-in needs at least 2")]
    TooFewInstances { service: ServiceId, instances: u32 },
    #[error("unknown service id {service}")]
    UnknownService { service: ServiceId },
    #[error(
        "plan for service {service} is stale: computed at revision {plan_revision}, \
         placement is at {current_revision}"
    )]
    StalePlan {
        service: ServiceId,
        plan_revision: u64,
        current_revision: u64,
    },
    #[error("edge {edge} cannot store the planned instance")]
    StorageExceeded { edge: EdgeId },
    #[error(
        "cannot place '{service}': instance needs {needed_bytes} bytes, \
         largest remaining edge capacity is {max_free_bytes} bytes"
    )]
    InitialPlacementInfeasible {
        service: String,
        needed_bytes: u64,
        max_free_bytes: u64,
    },
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::ActiveVehicle;

    fn cfg(num_edges: usize) -> NetworkConfig {
        NetworkConfig {
            bandwidth_hz: 1e6,
            tx_power_w: 10.0,
            noise_power_w: 1e-13,
            backhaul_bps: 1e9,
            user_context_bytes: 1e6,
            propagation_speed_mps: 3e8,
            slot_seconds: 5.0,
            horizon_seconds: 750.0,
            frame_slots: 15,
            q_threshold: 0.5,
            util_high_pct: 90.0,
            util_low_pct: 30.0,
            num_edges,
            region_side_m: 15000.0,
        }
    }

    fn grid_edges(n: usize, capacity: u64) -> Vec<EdgeNode> {
        let g = (n as f64).sqrt().ceil() as usize;
        let cell = 15000.0 / g as f64;
        (0..n)
            .map(|k| EdgeNode {
                id: k,
                position: (((k % g) as f64 + 0.5) * cell, ((k / g) as f64 + 0.5) * cell),
                cpu_hz: 1e10,
                storage_capacity_bytes: capacity,
                storage_used_bytes: 0,
            })
            .collect()
    }

    fn svc(id: usize, threshold: f64, layer: u64) -> ServiceSpec {
        ServiceSpec {
            id,
            name: format!("S{id}"),
            delay_threshold_s: threshold,
            input_bits: 3200.0,
            compute_intensity: 36000.0,
            instance_layer_bytes: layer,
            capacity: 30,
        }
    }

    fn flock_near(edge_pos: (f64, f64), n: usize, service: ServiceId) -> Vec<ActiveVehicle> {
        (0..n)
            .map(|i| ActiveVehicle {
                id: i as u64,
                service,
                pos: (edge_pos.0 + 10.0 * i as f64, edge_pos.1),
            })
            .collect()
    }

    fn demand_from(
        active: &[ActiveVehicle],
        edges: &[EdgeNode],
        num_services: usize,
    ) -> DemandMatrix {
        let mut demand = DemandMatrix::zero(0, edges.len(), num_services);
        for v in active {
            let nearest = crate::trace::nearest_edge(v.pos, edges);
            demand.add(nearest, v.service);
        }
        demand
    }

    #[test]
    fn migrate_follows_the_demand() {
        let edges = grid_edges(9, 2_000_000_000);
        let c = cfg(9);
        let services = vec![svc(0, 0.5, 100_000_000)];
        let mut placement = Placement::new(9, 1);
        placement.add_instance(0, 0);
        let active = flock_near(edges[3].position, 8, 0);
        let demand = demand_from(&active, &edges, 1);
        let report = solve_migrate(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        let plan = report.plan.expect("feasible");
        assert_eq!(plan.source_edge, 0);
        assert_eq!(plan.target_edge, 3);
        assert_eq!(report.candidates_evaluated, 8);
        assert!(plan.candidate_mean_delay_s < 0.5);
        // No demand at the source, so only the layer moves.
        assert_eq!(plan.users_moved, 0);
        assert!((plan.migration_delay_s - 0.8).abs() < 1e-12);
        assert!(
            (plan.objective_value - (plan.candidate_mean_delay_s + plan.migration_delay_s)).abs()
                < 1e-15
        );
    }

    #[test]
    fn migrate_counts_source_context_in_objective_and_storage() {
        let edges = grid_edges(4, 2_000_000_000);
        let c = cfg(4);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(4, 1);
        placement.add_instance(0, 0);
        // 12 vehicles sit at the hosting edge, so their context moves too.
        let active = flock_near(edges[0].position, 12, 0);
        let demand = demand_from(&active, &edges, 1);
        let report = solve_migrate(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        let plan = report.plan.expect("feasible");
        assert_eq!(plan.users_moved, 12);
        // (100 MB + 12 x 1 MB) x 8 / 1 Gbps = 0.896 s.
        assert!((plan.migration_delay_s - 0.896).abs() < 1e-12);
    }

    #[test]
    fn migrate_infeasible_when_all_targets_are_full() {
        let mut edges = grid_edges(2, 2_000_000_000);
        edges[1].storage_used_bytes = edges[1].storage_capacity_bytes;
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(2, 1);
        placement.add_instance(0, 0);
        let active = flock_near(edges[1].position, 3, 0);
        let demand = demand_from(&active, &edges, 1);
        let report = solve_migrate(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        assert!(report.plan.is_none());
        assert_eq!(report.candidates_evaluated, 1);
        assert_eq!(report.candidates_feasible, 0);
    }

    #[test]
    fn migrate_needs_an_instance() {
        let edges = grid_edges(2, 2_000_000_000);
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let placement = Placement::new(2, 1);
        let demand = DemandMatrix::zero(0, 2, 1);
        assert!(matches!(
            solve_migrate(0, &placement, &demand, &[], &c, &edges, &services),
            Err(SolverError::NoInstances { service: 0 })
        ));
        assert!(matches!(
            solve_migrate(3, &placement, &demand, &[], &c, &edges, &services),
            Err(SolverError::UnknownService { service: 3 })
        ));
    }

    #[test]
    fn scale_out_prefers_the_loaded_host() {
        let edges = grid_edges(4, 2_000_000_000);
        let c = cfg(4);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(4, 1);
        placement.add_instance(0, 0);
        placement.add_instance(3, 0);
        // 40 vehicles crowd edge 0 (capacity 30): a second seat block at
        // edge 0 absorbs the spill that otherwise rides to edge 3.
        let active = flock_near(edges[0].position, 40, 0);
        let demand = demand_from(&active, &edges, 1);
        let report =
            solve_scale_out(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        let plan = report.plan.expect("feasible");
        assert_eq!(plan.edge, 0);
        assert_eq!(plan.direction, ScaleDirection::Out);
        assert_eq!(report.candidates_evaluated, 2);
    }

    #[test]
    fn scale_out_single_host_with_room_is_chosen() {
        let edges = grid_edges(2, 2_000_000_000);
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(2, 1);
        placement.add_instance(1, 0);
        let active = flock_near(edges[1].position, 2, 0);
        let demand = demand_from(&active, &edges, 1);
        let report =
            solve_scale_out(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        assert_eq!(report.plan.unwrap().edge, 1);
    }

    #[test]
    fn scale_out_infeasible_when_host_is_full() {
        let mut edges = grid_edges(2, 2_000_000_000);
        edges[1].storage_used_bytes = edges[1].storage_capacity_bytes - 100_000_000;
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(2, 1);
        placement.add_instance(1, 0); // occupies the last 100 MB
        let active = flock_near(edges[1].position, 2, 0);
        let demand = demand_from(&active, &edges, 1);
        let report =
            solve_scale_out(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        assert!(report.plan.is_none());
    }

    #[test]
    fn scale_in_removes_the_idle_instance() {
        let edges = grid_edges(4, 2_000_000_000);
        let c = cfg(4);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(4, 1);
        placement.add_instance(0, 0);
        placement.add_instance(3, 0);
        let active = flock_near(edges[0].position, 5, 0);
        let demand = demand_from(&active, &edges, 1);
        let report =
            solve_scale_in(0, &placement, &demand, &active, &c, &edges, &services).unwrap();
        let plan = report.plan.expect("feasible");
        assert_eq!(plan.edge, 3, "the zero-demand instance goes");
        assert_eq!(plan.direction, ScaleDirection::In);
    }

    #[test]
    fn scale_in_requires_two_instances() {
        let edges = grid_edges(2, 2_000_000_000);
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(2, 1);
        placement.add_instance(0, 0);
        let demand = DemandMatrix::zero(0, 2, 1);
        assert!(matches!(
            solve_scale_in(0, &placement, &demand, &[], &c, &edges, &services),
            Err(SolverError::TooFewInstances {
                service: 0,
                instances: 1
            })
        ));
    }

    #[test]
    fn apply_migrate_conserves_instances_and_rejects_replay() {
        let edges = grid_edges(9, 2_000_000_000);
        let c = cfg(9);
        let services = vec![svc(0, 0.5, 100_000_000)];
        let mut placement = Placement::new(9, 1);
        placement.add_instance(0, 0);
        let active = flock_near(edges[3].position, 8, 0);
        let demand = demand_from(&active, &edges, 1);
        let plan = solve_migrate(0, &placement, &demand, &active, &c, &edges, &services)
            .unwrap()
            .plan
            .unwrap();
        let wrapped = PlacementPlan::Migrate(plan);
        apply_plan(&mut placement, &wrapped, &c, &edges, &services).unwrap();
        assert_eq!(placement.count(0, 0), 0);
        assert_eq!(placement.count(3, 0), 1);
        assert_eq!(placement.instance_count(0), 1);
        // Exactly two entries changed and the revision moved twice.
        assert_eq!(placement.revision(0), 3);
        let err = apply_plan(&mut placement, &wrapped, &c, &edges, &services).unwrap_err();
        assert!(
            matches!(err, SolverError::StalePlan { service: 0, .. }),
            "got {err}"
        );
    }

    #[test]
    fn apply_scale_adjusts_instance_totals() {
        let edges = grid_edges(2, 2_000_000_000);
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let mut placement = Placement::new(2, 1);
        placement.add_instance(0, 0);
        let out = PlacementPlan::Scale(ScalePlan {
            service: 0,
            edge: 0,
            direction: ScaleDirection::Out,
            objective_value: 0.0,
            base_revision: placement.revision(0),
        });
        apply_plan(&mut placement, &out, &c, &edges, &services).unwrap();
        assert_eq!(placement.instance_count(0), 2);
        let back_in = PlacementPlan::Scale(ScalePlan {
            service: 0,
            edge: 0,
            direction: ScaleDirection::In,
            objective_value: 0.0,
            base_revision: placement.revision(0),
        });
        apply_plan(&mut placement, &back_in, &c, &edges, &services).unwrap();
        assert_eq!(placement.instance_count(0), 1);
    }

    #[test]
    fn initial_placement_prefers_the_central_edge() {
        let edges = grid_edges(9, 2_000_000_000);
        let c = cfg(9);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let placement = initial_placement(&services, &edges, &c, 1, 1).unwrap();
        // Edge 4 sits at the region center: lowest mean probe delay.
        assert_eq!(placement.count(4, 0), 1);
        assert_eq!(placement.instance_count(0), 1);
    }

    #[test]
    fn initial_placement_spreads_replicas() {
        let edges = grid_edges(9, 2_000_000_000);
        let c = cfg(9);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let placement = initial_placement(&services, &edges, &c, 2, 1).unwrap();
        assert_eq!(placement.instance_count(0), 2);
        assert_eq!(
            placement.hosting_edges(0).len(),
            2,
            "replicas on distinct edges"
        );
    }

    #[test]
    fn initial_placement_orders_services_by_size() {
        // The big service claims the central edge first even though it has
        // a higher id.
        let edges = grid_edges(9, 300_000_000);
        let c = cfg(9);
        let services = vec![svc(0, 5.0, 100_000_000), svc(1, 5.0, 250_000_000)];
        let placement = initial_placement(&services, &edges, &c, 1, 1).unwrap();
        assert_eq!(placement.count(4, 1), 1, "largest service placed first");
        assert_eq!(placement.count(4, 0), 0, "no room left at the center");
        assert_eq!(placement.instance_count(0), 1);
    }

    #[test]
    fn initial_placement_reports_the_shortfall() {
        let edges = grid_edges(2, 50_000_000);
        let c = cfg(2);
        let services = vec![svc(0, 5.0, 100_000_000)];
        let err = initial_placement(&services, &edges, &c, 1, 1).unwrap_err();
        match err {
            SolverError::InitialPlacementInfeasible {
                service,
                needed_bytes,
                max_free_bytes,
            } => {
                assert_eq!(service, "S0");
                assert_eq!(needed_bytes, 100_000_000);
                assert_eq!(max_free_bytes, 50_000_000);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn impacted_vehicles_reads_source_demand() {
        let edges = grid_edges(2, 2_000_000_000);
        let mut demand = DemandMatrix::zero(0, 2, 1);
        for _ in 0..12 {
            demand.add(0, 0);
        }
        let plan = MigratePlan {
            service: 0,
            source_edge: 0,
            target_edge: 1,
            objective_value: 1.0,
            candidate_mean_delay_s: 0.1,
            migration_delay_s: 0.9,
            users_moved: 12,
            base_revision: 1,
        };
        assert_eq!(impacted_vehicles(&plan, &demand), 12);
        let _ = edges;
    }
}
