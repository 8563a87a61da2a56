//! Input loading and artifact writing shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use dosm_core::checkpoint::{self, Checkpoint, Component};
use dosm_core::config::Scenario;
use dosm_core::critic::ValueNet;
use dosm_core::predictor::GruModel;
use dosm_core::sim::Policy;
use dosm_core::trace::{
    bind_services, normalize_epochs, parse_latlon_cab, parse_trace_xy, LatLonProjection,
    TraceRecord, Vehicle,
};

use crate::error::{runtime, validation, CliError};

/// Load a scenario TOML (bundled default when `path` is `None`), with an
/// optional separate catalog file.
pub fn load_scenario(path: Option<&Path>, catalog: Option<&Path>) -> Result<Scenario, CliError> {
    let scenario_text = match path {
        Some(p) => read_input(p)?,
        None => dosm_core::config::default_scenario_toml().to_string(),
    };
    let catalog_text = catalog.map(read_input).transpose()?;
    Scenario::from_toml_str(&scenario_text, catalog_text.as_deref())
        .map_err(|e| validation(format!("scenario: {e}")))
}

/// Load a trace and bind vehicles to services. A file is parsed as the
/// x/y CSV format; a directory is treated as a lat/lon cab dataset (one
/// file per vehicle, requiring a `[trace]` origin in the scenario).
pub fn load_vehicles(
    scenario: &Scenario,
    trace: &Path,
    seed: u64,
) -> Result<Vec<Vehicle>, CliError> {
    let records = if trace.is_dir() {
        read_cab_directory(scenario, trace)?
    } else {
        parse_trace_xy(&read_input(trace)?)
            .map_err(|e| validation(format!("trace {}: {e}", trace.display())))?
    };
    bind_services(
        &records,
        scenario.templates.len(),
        scenario.service_mix.as_deref(),
        seed,
    )
    .map_err(|e| validation(format!("trace {}: {e}", trace.display())))
}

fn read_cab_directory(scenario: &Scenario, dir: &Path) -> Result<Vec<TraceRecord>, CliError> {
    let (origin_lat_deg, origin_lon_deg) = scenario
        .trace_origin
        .ok_or_else(|| validation("lat/lon trace ingest needs a [trace] origin in the scenario"))?;
    let proj = LatLonProjection {
        origin_lat_deg,
        origin_lon_deg,
        region_side_m: scenario.network.region_side_m,
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| validation(format!("trace directory {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(validation(format!(
            "trace directory {} is empty",
            dir.display()
        )));
    }
    let mut records = Vec::new();
    for (vehicle, file) in files.iter().enumerate() {
        let text = read_input(file)?;
        let parsed = parse_latlon_cab(vehicle as u64, &text, &proj)
            .map_err(|e| validation(format!("trace {}: {e}", file.display())))?;
        records.extend(parsed);
    }
    normalize_epochs(&mut records);
    Ok(records)
}

/// The trained models a `run` invocation has been handed via --checkpoint.
#[derive(Default)]
pub struct LoadedCheckpoints {
    pub gru: Option<Vec<GruModel>>,
    pub critics: Option<Vec<ValueNet>>,
}

pub fn load_checkpoints(paths: &[PathBuf]) -> Result<LoadedCheckpoints, CliError> {
    let mut loaded = LoadedCheckpoints::default();
    for path in paths {
        let ckpt = checkpoint::load(path)
            .map_err(|e| validation(format!("checkpoint {}: {e}", path.display())))?;
        match ckpt.component {
            Component::Gru => loaded.gru = Some(ckpt.into_gru().expect("validated payload")),
            Component::Critic => {
                loaded.critics = Some(ckpt.into_critics().expect("validated payload"));
            }
        }
    }
    Ok(loaded)
}

/// Check one policy's model requirements, naming the policy in the error.
pub fn require_models(policy: Policy, loaded: &LoadedCheckpoints) -> Result<(), CliError> {
    if policy.needs_critics() && loaded.critics.is_none() {
        return Err(validation(format!(
            "policy {policy} requires a critic checkpoint; pass --checkpoint <file>"
        )));
    }
    if policy.needs_gru() && loaded.gru.is_none() {
        return Err(validation(format!(
            "policy {policy} requires a gru checkpoint; pass --checkpoint <file>"
        )));
    }
    Ok(())
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CliError> {
    checkpoint::save(path, ckpt).map_err(|e| runtime(format!("writing {}: {e}", path.display())))
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))
}

pub fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| runtime(format!("creating {}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| runtime(format!("writing {}: {e}", path.display())))
}

/// Parse the comma-separated --policies list.
pub fn parse_policies(arg: &str) -> Result<Vec<Policy>, CliError> {
    let mut policies = Vec::new();
    for name in arg.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let policy: Policy = name
            .parse()
            .map_err(|e| validation(format!("--policies: {e}")))?;
        if !policies.contains(&policy) {
            policies.push(policy);
        }
    }
    if policies.is_empty() {
        return Err(validation("--policies lists no policy"));
    }
    Ok(policies)
}
