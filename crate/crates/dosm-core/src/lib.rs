//! Deterministic simulator and optimization library for managing the
//! lifecycle of latency-critical services hosted on roadside edge nodes.
//!
//! Vehicles drive through a region and continuously request services
//! (collision warnings, platooning coordination, ...) that run as replicated
//! instances on edge servers. As vehicles move, the best hosting edge for a
//! service changes; the operator can react with one of four lifecycle
//! actions per service: migrate an instance, scale out, scale in, or do
//! nothing. This crate provides every building block of that control loop:
//!
//! - [`catalog`] / [`config`]: service catalog, edge topology and scenario
//!   files (TOML), with strict validation.
//! - [`trace`]: vehicle mobility traces (CSV), linear position interpolation
//!   and per-slot demand extraction.
//! - [`delay`]: wireless access rate, service delay (propagation +
//!   transmission + computation) and migration delay models.
//! - [`predictor`]: per-service GRU demand forecasters (hand-rolled
//!   forward/BPTT/Adam on top of `ndarray`).
//! - [`critic`]: per-service value networks estimating placement quality
//!   in [0, 1] from replayed experience.
//! - [`solver`]: exact placement optimizers (migrate / scale-out / scale-in)
//!   by exhaustive enumeration of the small candidate space.
//! - [`decision`]: the threshold logic mapping (quality, predicted
//!   utilization, instance count) to a lifecycle action.
//! - [`sim`]: the slot-by-slot harness tying everything together for the
//!   four built-in policies (NM, AM, DRL, DOSM).
//! - [`metrics`] / [`checkpoint`]: stable CSV/JSON outputs and model
//!   persistence.
//!
//! Everything is deterministic for a given (scenario, trace, seed): one
//! thread, one seeded RNG stream per labeled consumer ([`seeds`]), fixed
//! iteration orders, no platform-dependent math.

pub mod catalog;
pub mod checkpoint;
pub mod config;
pub mod critic;
pub mod decision;
pub mod delay;
pub mod metrics;
pub mod nn;
pub mod placement;
pub mod predictor;
pub mod seeds;
pub mod sim;
pub mod solver;
pub mod trace;

pub use catalog::{
    CatalogError, EdgeId, EdgeNode, NetworkConfig, ServiceId, ServiceSpec, VehicleId,
};
pub use config::{ConfigError, Scenario};
pub use decision::DecisionKind;
pub use placement::Placement;
pub use sim::{Policy, RunOptions, ScenarioRun, SimError};
