//! Constraint checkers: given a plan the production solver returned,
//! re-verify every claimed number and every feasibility condition from
//! first principles (via the reference math in [`crate::oracle`]). Errors
//! are plain strings naming the violated condition.

use dosm_core::solver::{MigratePlan, ScaleDirection, ScalePlan};

use crate::gen::TestInstance;
use crate::oracle::{ref_mean_delay_s, ref_migration_delay_s, ref_occupied_bytes, vehicles_of};

/// Verify a MIGRATE plan end to end.
pub fn check_migrate_plan(inst: &TestInstance, plan: &MigratePlan) -> Result<(), String> {
    let svc = inst
        .services
        .get(plan.service)
        .ok_or_else(|| format!("unknown service {}", plan.service))?;
    if plan.source_edge == plan.target_edge {
        return Err("source equals target".into());
    }
    if inst.placement.count(plan.source_edge, plan.service) == 0 {
        return Err(format!(
            "no instance on claimed source {}",
            plan.source_edge
        ));
    }
    if plan.target_edge >= inst.edges.len() {
        return Err(format!("target {} out of range", plan.target_edge));
    }

    let users = inst.demand.count(plan.source_edge, plan.service);
    if users != plan.users_moved {
        return Err(format!(
            "users_moved {} but demand says {users}",
            plan.users_moved
        ));
    }
    let t_m = ref_migration_delay_s(svc, users, &inst.cfg);
    if t_m != plan.migration_delay_s {
        return Err(format!(
            "migration delay {} but model says {t_m}",
            plan.migration_delay_s
        ));
    }
    if t_m > inst.cfg.slot_seconds {
        return Err(format!(
            "migration takes {t_m}s, over the {}s slot",
            inst.cfg.slot_seconds
        ));
    }

    let occupied = ref_occupied_bytes(inst, plan.target_edge) as f64;
    let added = svc.instance_layer_bytes as f64 + inst.cfg.user_context_bytes * f64::from(users);
    if occupied + added > inst.edges[plan.target_edge].storage_capacity_bytes as f64 {
        return Err(format!(
            "target {} storage exceeded: {occupied} + {added} > {}",
            plan.target_edge, inst.edges[plan.target_edge].storage_capacity_bytes
        ));
    }

    let mut column = inst.placement.column(plan.service);
    column[plan.source_edge] -= 1;
    column[plan.target_edge] += 1;
    let vehicles = vehicles_of(inst, plan.service);
    let mean = ref_mean_delay_s(&column, &vehicles, svc, &inst.edges, &inst.cfg)
        .ok_or("candidate placement hosts nothing")?;
    if mean != plan.candidate_mean_delay_s {
        return Err(format!(
            "candidate mean {} but reference says {mean}",
            plan.candidate_mean_delay_s
        ));
    }
    if mean > svc.delay_threshold_s {
        return Err(format!(
            "mean {mean} over threshold {}",
            svc.delay_threshold_s
        ));
    }
    let objective = mean + t_m;
    if objective != plan.objective_value {
        return Err(format!(
            "objective {} but mean + migration = {objective}",
            plan.objective_value
        ));
    }
    Ok(())
}

/// Verify a SCALE_OUT plan end to end.
pub fn check_scale_out_plan(inst: &TestInstance, plan: &ScalePlan) -> Result<(), String> {
    if plan.direction != ScaleDirection::Out {
        return Err("not a scale-out plan".into());
    }
    let svc = inst
        .services
        .get(plan.service)
        .ok_or_else(|| format!("unknown service {}", plan.service))?;
    if inst.placement.count(plan.edge, plan.service) == 0 {
        return Err(format!(
            "edge {} does not already host the service",
            plan.edge
        ));
    }
    let occupied = ref_occupied_bytes(inst, plan.edge);
    if occupied + svc.instance_layer_bytes > inst.edges[plan.edge].storage_capacity_bytes {
        return Err(format!("edge {} storage exceeded", plan.edge));
    }
    let mut column = inst.placement.column(plan.service);
    column[plan.edge] += 1;
    let vehicles = vehicles_of(inst, plan.service);
    let mean = ref_mean_delay_s(&column, &vehicles, svc, &inst.edges, &inst.cfg)
        .ok_or("candidate placement hosts nothing")?;
    if mean != plan.objective_value {
        return Err(format!(
            "objective {} but reference mean is {mean}",
            plan.objective_value
        ));
    }
    if mean > svc.delay_threshold_s {
        return Err(format!(
            "mean {mean} over threshold {}",
            svc.delay_threshold_s
        ));
    }
    Ok(())
}

/// Verify a SCALE_IN plan end to end.
pub fn check_scale_in_plan(inst: &TestInstance, plan: &ScalePlan) -> Result<(), String> {
    if plan.direction != ScaleDirection::In {
        return Err("not a scale-in plan".into());
    }
    let svc = inst
        .services
        .get(plan.service)
        .ok_or_else(|| format!("unknown service {}", plan.service))?;
    if inst.placement.count(plan.edge, plan.service) == 0 {
        return Err(format!("edge {} hosts nothing to remove", plan.edge));
    }
    if inst.placement.instance_count(plan.service) < 2 {
        return Err("scale-in from a single instance".into());
    }
    let mut column = inst.placement.column(plan.service);
    column[plan.edge] -= 1;
    let vehicles = vehicles_of(inst, plan.service);
    let mean = ref_mean_delay_s(&column, &vehicles, svc, &inst.edges, &inst.cfg)
        .ok_or("removal left the service without instances")?;
    if mean != plan.objective_value {
        return Err(format!(
            "objective {} but reference mean is {mean}",
            plan.objective_value
        ));
    }
    if mean > svc.delay_threshold_s {
        return Err(format!(
            "mean {mean} over threshold {}",
            svc.delay_threshold_s
        ));
    }
    Ok(())
}
