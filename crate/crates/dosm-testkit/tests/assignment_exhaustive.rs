//! The canonical greedy admission rule versus the true optimum: on small
//! instances (≤ 6 vehicles, ≤ 3 hosting edges) an exhaustive search over
//! every seat-respecting assignment must never beat the greedy mean by
//! finding greedy infeasible, and greedy must never beat the optimum.

use dosm_core::delay::assign_for_service;
use dosm_core::seeds;
use dosm_testkit::oracle_assignment_mean;
use dosm_testkit::random_instance;
use rand::Rng;

#[test]
fn greedy_assignment_is_never_better_than_exhaustive_optimum() {
    let mut compared = 0;
    for seed in 0..400u64 {
        let inst = random_instance(seed);
        let mut rng = seeds::rng_for("assignment-sample", seed);
        for svc in &inst.services {
            let full = inst.placement.column(svc.id);
            // Shrink to ≤ 3 hosting edges by zeroing the rest of the column.
            let hosts: Vec<usize> = (0..full.len()).filter(|&e| full[e] > 0).take(3).collect();
            let mut column = vec![0u32; full.len()];
            for &e in &hosts {
                column[e] = full[e];
            }
            // Sample ≤ 6 of the service's vehicles (ascending id).
            let mut vehicles: Vec<(u64, (f64, f64))> = inst
                .active
                .iter()
                .filter(|v| v.service == svc.id)
                .map(|v| (v.id, v.pos))
                .collect();
            while vehicles.len() > 6 {
                let k = rng.random_range(0..vehicles.len());
                vehicles.remove(k);
            }
            if vehicles.is_empty() {
                continue;
            }
            let Some(optimum) =
                oracle_assignment_mean(&column, &vehicles, svc, &inst.edges, &inst.cfg)
            else {
                continue; // seats cannot cover the vehicles
            };
            let greedy =
                assign_for_service(&column, &vehicles, svc, &inst.edges, &inst.cfg).unwrap();
            assert!(
                greedy.mean_delay_s >= optimum - 1e-12,
                "seed {seed} service {}: greedy {} beat optimum {optimum}",
                svc.id,
                greedy.mean_delay_s
            );
            assert_eq!(
                greedy.overflow, 0,
                "seats covered everyone yet overflow happened"
            );
            // Seat limits hold per edge.
            for &e in &hosts {
                let used = greedy.assigned.iter().filter(|&&a| a == e).count() as i64;
                assert!(used <= i64::from(column[e]) * i64::from(svc.capacity));
            }
            compared += 1;
        }
    }
    assert!(compared > 200, "only {compared} assignment comparisons ran");
}
