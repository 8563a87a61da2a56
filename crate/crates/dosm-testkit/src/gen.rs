//! Seeded random problem instances: a snapshot of edges, services, demand,
//! and a running placement, feasible by construction.

use dosm_core::catalog::{EdgeNode, NetworkConfig, ServiceSpec};
use dosm_core::placement::Placement;
use dosm_core::seeds;
use dosm_core::trace::{nearest_edge, ActiveVehicle, DemandMatrix};
use rand::Rng;

/// One self-consistent optimization instance for a single slot.
#[derive(Debug, Clone)]
pub struct TestInstance {
    pub cfg: NetworkConfig,
    pub edges: Vec<EdgeNode>,
    pub services: Vec<ServiceSpec>,
    pub placement: Placement,
    pub demand: DemandMatrix,
    pub active: Vec<ActiveVehicle>,
}

/// Generate a random instance with varying small sizes (≤ 9 edges, ≤ 6
/// services, ≤ 50 vehicles). Deterministic per seed; every service ends up
/// with at least one placed instance, and the initial placement always
/// fits edge storage.
pub fn random_instance(seed: u64) -> TestInstance {
    let mut rng = seeds::rng_for("testkit-instance", seed);
    let num_edges = rng.random_range(2..=9usize);
    let num_services = rng.random_range(1..=6usize);
    let num_vehicles = rng.random_range(1..=50usize);
    build_instance(rng, num_edges, num_services, num_vehicles)
}

/// Generate a random instance with fixed topology dimensions.
pub fn random_instance_sized(seed: u64, num_edges: usize, num_services: usize) -> TestInstance {
    let mut rng = seeds::rng_for("testkit-instance-sized", seed);
    let num_vehicles = rng.random_range(1..=50usize);
    build_instance(rng, num_edges, num_services, num_vehicles)
}

fn build_instance(
    mut rng: impl Rng,
    num_edges: usize,
    num_services: usize,
    num_vehicles: usize,
) -> TestInstance {
    let region = 15_000.0;
    // A slow backhaul sometimes pushes migration past the slot bound,
    // exercising the time-feasibility branch.
    let backhaul_bps = *[1e8, 5e8, 1e9].get(rng.random_range(0..3usize)).unwrap();

    let cfg = NetworkConfig {
        bandwidth_hz: 1e6,
        tx_power_w: 10.0,
        noise_power_w: 1e-13,
        backhaul_bps,
        user_context_bytes: 1e6,
        propagation_speed_mps: 3e8,
        slot_seconds: 5.0,
        horizon_seconds: 750.0,
        frame_slots: 15,
        q_threshold: 0.5,
        util_high_pct: 90.0,
        util_low_pct: 30.0,
        num_edges,
        region_side_m: region,
    };

    let mut edges: Vec<EdgeNode> = (0..num_edges)
        .map(|id| EdgeNode {
            id,
            position: (rng.random_range(0.0..region), rng.random_range(0.0..region)),
            cpu_hz: rng.random_range(5e9..2e10),
            storage_capacity_bytes: rng.random_range(300_000_000..2_000_000_000u64),
            storage_used_bytes: rng.random_range(0..100_000_000u64),
        })
        .collect();

    let thresholds = [0.02, 0.1, 0.5, 1.0];
    let services: Vec<ServiceSpec> = (0..num_services)
        .map(|id| ServiceSpec {
            id,
            name: format!("svc-{id}"),
            delay_threshold_s: thresholds[rng.random_range(0..thresholds.len())],
            input_bits: rng.random_range(1200..=4800) as f64,
            compute_intensity: rng.random_range(20_000..=90_000) as f64,
            instance_layer_bytes: rng.random_range(50_000_000..=300_000_000u64),
            capacity: rng.random_range(1..=30u32),
        })
        .collect();

    // Place 1..=3 instances per service. The first instance must land
    // somewhere: if no edge has room, the fullest candidate edge is grown
    // to fit (keeping the instance-fits-storage invariant true by
    // construction). Extra instances are placed only where they fit.
    let mut placement = Placement::new(num_edges, num_services);
    for svc in &services {
        let free = |placement: &Placement, edges: &[EdgeNode], e: usize| {
            edges[e]
                .storage_capacity_bytes
                .saturating_sub(placement.occupied_bytes(&edges[e], &services))
        };
        let best = (0..num_edges)
            .max_by_key(|&e| free(&placement, &edges, e))
            .expect("at least one edge");
        if free(&placement, &edges, best) < svc.instance_layer_bytes {
            edges[best].storage_capacity_bytes +=
                svc.instance_layer_bytes - free(&placement, &edges, best);
        }
        placement.add_instance(best, svc.id);
        for _ in 1..rng.random_range(1..=3usize) {
            let e = rng.random_range(0..num_edges);
            if free(&placement, &edges, e) >= svc.instance_layer_bytes {
                placement.add_instance(e, svc.id);
            }
        }
    }

    let active: Vec<ActiveVehicle> = (0..num_vehicles)
        .map(|id| ActiveVehicle {
            id: id as u64,
            service: rng.random_range(0..num_services),
            pos: (rng.random_range(0.0..region), rng.random_range(0.0..region)),
        })
        .collect();
    let mut demand = DemandMatrix::zero(0, num_edges, num_services);
    for v in &active {
        demand.add(nearest_edge(v.pos, &edges), v.service);
    }

    placement
        .validate(&edges, &services)
        .expect("generated placement is consistent");
    TestInstance {
        cfg,
        edges,
        services,
        placement,
        demand,
        active,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_deterministic_and_within_bounds() {
        for seed in 0..20 {
            let a = random_instance(seed);
            let b = random_instance(seed);
            assert_eq!(a.edges.len(), b.edges.len());
            assert_eq!(a.demand.total(), b.demand.total());
            assert!(a.edges.len() <= 9 && a.services.len() <= 6);
            assert!(a.active.len() <= 50);
            assert_eq!(a.demand.total() as usize, a.active.len());
            for svc in &a.services {
                assert!(a.placement.instance_count(svc.id) >= 1);
            }
        }
    }
}
