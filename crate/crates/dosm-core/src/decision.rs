//! The per-service lifecycle rule that turns a quality estimate and a
//! predicted utilization into one of four actions.
//!
//! Boundary semantics are part of the contract:
//! - `q` exactly at the threshold counts as good (no migration pressure);
//! - utilization exactly at the high mark resolves to MIGRATE, not
//!   SCALE_OUT;
//! - utilization exactly at the low mark resolves to NO_CHANGE;
//! - SCALE_IN additionally requires more than one running instance.

use serde::{Deserialize, Serialize};

use crate::catalog::{NetworkConfig, ServiceId, ServiceSpec};
use crate::placement::Placement;
use crate::predictor::{utilization_pct, FramePrediction, PredictorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DecisionKind {
    Migrate,
    ScaleIn,
    ScaleOut,
    NoChange,
}

impl std::fmt::Display for DecisionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DecisionKind::Migrate => "MIGRATE",
            DecisionKind::ScaleIn => "SCALE_IN",
            DecisionKind::ScaleOut => "SCALE_OUT",
            DecisionKind::NoChange => "NO_CHANGE",
        };
        f.write_str(s)
    }
}

/// The lifecycle rule for one service.
pub fn decide(q: f64, utilization_pct: f64, instances: u32, cfg: &NetworkConfig) -> DecisionKind {
    if q < cfg.q_threshold {
        if utilization_pct > cfg.util_high_pct {
            DecisionKind::ScaleOut
        } else {
            DecisionKind::Migrate
        }
    } else if utilization_pct < cfg.util_low_pct && instances > 1 {
        DecisionKind::ScaleIn
    } else {
        DecisionKind::NoChange
    }
}

/// One decided action with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleDecision {
    pub service: ServiceId,
    pub kind: DecisionKind,
    pub q_value: f64,
    pub utilization_pct: f64,
    pub instances: u32,
}

/// Apply the rule to every service (in id order) from its quality estimate
/// and its demand forecast for the coming frame.
pub fn frame_decisions(
    qs: &[f64],
    predictions: &[FramePrediction],
    placement: &Placement,
    services: &[ServiceSpec],
    cfg: &NetworkConfig,
) -> Result<Vec<LifecycleDecision>, PredictorError> {
    debug_assert_eq!(qs.len(), services.len());
    debug_assert_eq!(predictions.len(), services.len());
    services
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let instances = placement.instance_count(s);
            let utilization = utilization_pct(&predictions[s], instances, spec.capacity)?;
            Ok(LifecycleDecision {
                service: s,
                kind: decide(qs[s], utilization, instances, cfg),
                q_value: qs[s],
                utilization_pct: utilization,
                instances,
            })
        })
        .collect()
}
