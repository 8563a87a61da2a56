//! Reference implementations of the placement optimizations, written
//! directly from their definitions and sharing no code with the production
//! solver or delay module. Candidates are collected eagerly and sorted,
//! rather than scanned with a running minimum, so even the search strategy
//! differs from production.

use dosm_core::catalog::{EdgeId, EdgeNode, NetworkConfig, ServiceId, ServiceSpec};
use dosm_core::solver::{MigratePlan, ScaleDirection, ScalePlan};

use crate::gen::TestInstance;

// ── Independent delay math ──────────────────────────────────────────────

/// One request's delay, restated from the model definition: propagation at
/// light speed over the (1 m floored) distance, transmission of the input
/// payload at the Shannon uplink rate under inverse-square pathloss, and
/// computation at the edge CPU.
pub fn ref_service_delay_s(
    pos: (f64, f64),
    edge: &EdgeNode,
    svc: &ServiceSpec,
    cfg: &NetworkConfig,
) -> f64 {
    let dx = pos.0 - edge.position.0;
    let dy = pos.1 - edge.position.1;
    let d = (dx * dx + dy * dy).sqrt().max(1.0);
    let snr = (cfg.tx_power_w / cfg.noise_power_w) / (d * d);
    let rate = cfg.bandwidth_hz * (1.0 + snr).log2();
    d / cfg.propagation_speed_mps
        + svc.input_bits / rate
        + svc.input_bits * svc.compute_intensity / edge.cpu_hz
}

/// Migration delay restated from its definition: instance layer plus one
/// context blob per moved user, in bits, over the backhaul.
pub fn ref_migration_delay_s(svc: &ServiceSpec, users: u32, cfg: &NetworkConfig) -> f64 {
    let bytes = svc.instance_layer_bytes as f64 + cfg.user_context_bytes * f64::from(users);
    bytes * 8.0 / cfg.backhaul_bps
}

/// Mean delay of `vehicles` (ordered by ascending id) under replica
/// `column`, using the canonical admission rule restated from scratch:
/// vehicles are admitted best-delay-first (vehicle id on ties), each takes
/// its most preferred hosting edge with a free seat, overflowing to its
/// overall best edge when all seats are gone. Returns `None` when the
/// column hosts no instance.
pub fn ref_mean_delay_s(
    column: &[u32],
    vehicles: &[(u64, (f64, f64))],
    svc: &ServiceSpec,
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
) -> Option<f64> {
    let hosts: Vec<EdgeId> = column
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(e, _)| e)
        .collect();
    if hosts.is_empty() {
        return None;
    }
    if vehicles.is_empty() {
        return Some(0.0);
    }

    // Per-vehicle preference lists: (delay, edge) ascending.
    let prefs: Vec<Vec<(f64, EdgeId)>> = vehicles
        .iter()
        .map(|&(_, pos)| {
            let mut row: Vec<(f64, EdgeId)> = hosts
                .iter()
                .map(|&e| (ref_service_delay_s(pos, &edges[e], svc, cfg), e))
                .collect();
            row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            row
        })
        .collect();

    let mut admission: Vec<usize> = (0..vehicles.len()).collect();
    admission.sort_by(|&a, &b| {
        prefs[a][0]
            .0
            .total_cmp(&prefs[b][0].0)
            .then(vehicles[a].0.cmp(&vehicles[b].0))
    });

    let mut seats: Vec<i64> = vec![0; edges.len()];
    for &e in &hosts {
        seats[e] = i64::from(column[e]) * i64::from(svc.capacity);
    }
    let mut chosen = vec![(0.0, 0usize); vehicles.len()];
    for &vi in &admission {
        match prefs[vi].iter().find(|&&(_, e)| seats[e] > 0) {
            Some(&(delay, e)) => {
                seats[e] -= 1;
                chosen[vi] = (delay, e);
            }
            None => chosen[vi] = prefs[vi][0],
        }
    }
    let mut sum = 0.0;
    for &(delay, _) in &chosen {
        sum += delay;
    }
    Some(sum / vehicles.len() as f64)
}

/// Vehicles requesting `service`, ascending id, as (id, position) pairs.
pub fn vehicles_of(inst: &TestInstance, service: ServiceId) -> Vec<(u64, (f64, f64))> {
    inst.active
        .iter()
        .filter(|v| v.service == service)
        .map(|v| (v.id, v.pos))
        .collect()
}

/// Bytes occupied on `edge` (base usage plus every placed instance layer),
/// recounted directly from the placement matrix.
pub fn ref_occupied_bytes(inst: &TestInstance, edge: EdgeId) -> u64 {
    let mut bytes = inst.edges[edge].storage_used_bytes;
    for svc in &inst.services {
        bytes += u64::from(inst.placement.count(edge, svc.id)) * svc.instance_layer_bytes;
    }
    bytes
}

// ── Exhaustive optimizers ───────────────────────────────────────────────

/// What a reference optimization found.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<P> {
    pub plan: Option<P>,
    pub candidates_evaluated: u32,
    pub candidates_feasible: u32,
}

pub type OracleMigrate = OracleReport<MigratePlan>;
pub type OracleScale = OracleReport<ScalePlan>;

/// Exhaustive MIGRATE reference: every (source, target ≠ source) pair is
/// scored; feasibility and the objective are recomputed from first
/// principles; the winner is the sort-first candidate by
/// (objective, source, target).
pub fn oracle_migrate(inst: &TestInstance, service: ServiceId) -> Option<OracleMigrate> {
    let svc = inst.services.get(service)?;
    let column = inst.placement.column(service);
    let vehicles = vehicles_of(inst, service);
    let sources: Vec<EdgeId> = column
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(e, _)| e)
        .collect();
    if sources.is_empty() {
        return None;
    }

    struct Candidate {
        source: EdgeId,
        target: EdgeId,
        objective: f64,
        mean: f64,
        t_m: f64,
        users: u32,
    }
    let mut evaluated = 0;
    let mut feasible: Vec<Candidate> = Vec::new();
    for &source in &sources {
        let users = inst.demand.count(source, service);
        let t_m = ref_migration_delay_s(svc, users, &inst.cfg);
        for target in 0..inst.edges.len() {
            if target == source {
                continue;
            }
            evaluated += 1;
            if t_m > inst.cfg.slot_seconds {
                continue;
            }
            let occupied = ref_occupied_bytes(inst, target) as f64;
            let added =
                svc.instance_layer_bytes as f64 + inst.cfg.user_context_bytes * f64::from(users);
            if occupied + added > inst.edges[target].storage_capacity_bytes as f64 {
                continue;
            }
            let mut cand = column.clone();
            cand[source] -= 1;
            cand[target] += 1;
            let mean = ref_mean_delay_s(&cand, &vehicles, svc, &inst.edges, &inst.cfg)
                .expect("candidate hosts the target");
            if mean > svc.delay_threshold_s {
                continue;
            }
            feasible.push(Candidate {
                source,
                target,
                objective: mean + t_m,
                mean,
                t_m,
                users,
            });
        }
    }
    let n_feasible = feasible.len() as u32;
    feasible.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then(a.source.cmp(&b.source))
            .then(a.target.cmp(&b.target))
    });
    let plan = feasible.into_iter().next().map(|c| MigratePlan {
        service,
        source_edge: c.source,
        target_edge: c.target,
        objective_value: c.objective,
        candidate_mean_delay_s: c.mean,
        migration_delay_s: c.t_m,
        users_moved: c.users,
        base_revision: inst.placement.revision(service),
    });
    Some(OracleReport {
        plan,
        candidates_evaluated: evaluated,
        candidates_feasible: n_feasible,
    })
}

/// Exhaustive SCALE_OUT reference over hosting edges.
pub fn oracle_scale_out(inst: &TestInstance, service: ServiceId) -> Option<OracleScale> {
    let svc = inst.services.get(service)?;
    let column = inst.placement.column(service);
    let vehicles = vehicles_of(inst, service);
    let hosts: Vec<EdgeId> = column
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(e, _)| e)
        .collect();
    if hosts.is_empty() {
        return None;
    }
    let mut evaluated = 0;
    let mut feasible: Vec<(f64, EdgeId)> = Vec::new();
    for &host in &hosts {
        evaluated += 1;
        let occupied = ref_occupied_bytes(inst, host);
        if occupied + svc.instance_layer_bytes > inst.edges[host].storage_capacity_bytes {
            continue;
        }
        let mut cand = column.clone();
        cand[host] += 1;
        let mean = ref_mean_delay_s(&cand, &vehicles, svc, &inst.edges, &inst.cfg)
            .expect("host still placed");
        if mean > svc.delay_threshold_s {
            continue;
        }
        feasible.push((mean, host));
    }
    let n_feasible = feasible.len() as u32;
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let plan = feasible.into_iter().next().map(|(mean, edge)| ScalePlan {
        service,
        edge,
        direction: ScaleDirection::Out,
        objective_value: mean,
        base_revision: inst.placement.revision(service),
    });
    Some(OracleReport {
        plan,
        candidates_evaluated: evaluated,
        candidates_feasible: n_feasible,
    })
}

/// Exhaustive SCALE_IN reference over hosting edges; caller must ensure at
/// least two instances exist.
pub fn oracle_scale_in(inst: &TestInstance, service: ServiceId) -> Option<OracleScale> {
    let svc = inst.services.get(service)?;
    let column = inst.placement.column(service);
    let vehicles = vehicles_of(inst, service);
    let hosts: Vec<EdgeId> = column
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(e, _)| e)
        .collect();
    if column.iter().sum::<u32>() < 2 {
        return None;
    }
    let mut evaluated = 0;
    let mut feasible: Vec<(f64, EdgeId)> = Vec::new();
    for &host in &hosts {
        evaluated += 1;
        let mut cand = column.clone();
        cand[host] -= 1;
        let mean = ref_mean_delay_s(&cand, &vehicles, svc, &inst.edges, &inst.cfg)
            .expect("at least one instance remains");
        if mean > svc.delay_threshold_s {
            continue;
        }
        feasible.push((mean, host));
    }
    let n_feasible = feasible.len() as u32;
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let plan = feasible.into_iter().next().map(|(mean, edge)| ScalePlan {
        service,
        edge,
        direction: ScaleDirection::In,
        objective_value: mean,
        base_revision: inst.placement.revision(service),
    });
    Some(OracleReport {
        plan,
        candidates_evaluated: evaluated,
        candidates_feasible: n_feasible,
    })
}

// ── Exhaustive assignment ───────────────────────────────────────────────

/// True optimal mean delay over every seat-respecting assignment of
/// `vehicles` to hosting edges. Exponential — callers must keep it to
/// ≤ 6 vehicles and ≤ 3 hosting edges. Returns `None` when no instance is
/// placed or the seats cannot cover the vehicles.
pub fn oracle_assignment_mean(
    column: &[u32],
    vehicles: &[(u64, (f64, f64))],
    svc: &ServiceSpec,
    edges: &[EdgeNode],
    cfg: &NetworkConfig,
) -> Option<f64> {
    let hosts: Vec<EdgeId> = column
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(e, _)| e)
        .collect();
    if hosts.is_empty() {
        return None;
    }
    if vehicles.is_empty() {
        return Some(0.0);
    }
    let seats: Vec<i64> = hosts
        .iter()
        .map(|&e| i64::from(column[e]) * i64::from(svc.capacity))
        .collect();
    if seats.iter().sum::<i64>() < vehicles.len() as i64 {
        return None;
    }
    let delays: Vec<Vec<f64>> = vehicles
        .iter()
        .map(|&(_, pos)| {
            hosts
                .iter()
                .map(|&e| ref_service_delay_s(pos, &edges[e], svc, cfg))
                .collect()
        })
        .collect();

    // Odometer over host indices, one digit per vehicle.
    let mut choice = vec![0usize; vehicles.len()];
    let mut best: Option<f64> = None;
    loop {
        let mut used = vec![0i64; hosts.len()];
        let mut sum = 0.0;
        let mut ok = true;
        for (vi, &hi) in choice.iter().enumerate() {
            used[hi] += 1;
            if used[hi] > seats[hi] {
                ok = false;
                break;
            }
            sum += delays[vi][hi];
        }
        if ok {
            let mean = sum / vehicles.len() as f64;
            if best.is_none_or(|b| mean < b) {
                best = Some(mean);
            }
        }
        // Advance the odometer.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return best;
            }
            choice[k] += 1;
            if choice[k] < hosts.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
