//! `dosm generate` — synthesize a deterministic vehicle trace.

use std::path::PathBuf;

use clap::Args;
use dosm_core::trace::{generate_trace, trace_to_csv, GenerateOptions, MobilityModel};

use crate::error::{validation, CliError, EXIT_OK};
use crate::io_util::{load_scenario, write_output};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario TOML supplying the region size and slot length
    /// (bundled default when omitted).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Service catalog TOML overriding the scenario's [[service]] list.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Seed for trajectory generation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of vehicles to simulate.
    #[arg(long, default_value_t = 100)]
    pub vehicles: usize,
    /// Trace length in seconds (scenario horizon when omitted).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32, CliError> {
    let scenario = load_scenario(args.scenario.as_deref(), args.catalog.as_deref())?;
    let horizon_s = args.horizon.unwrap_or(scenario.network.horizon_seconds);
    let opts = GenerateOptions {
        num_vehicles: args.vehicles,
        horizon_s,
        region_side_m: scenario.network.region_side_m,
        step_s: scenario.network.slot_seconds,
        model: MobilityModel::RandomWaypoint,
    };
    let records =
        generate_trace(args.seed, &opts).map_err(|e| validation(format!("generate: {e}")))?;
    write_output(&args.out, &trace_to_csv(&records))?;
    log::info!(
        "wrote {} records for {} vehicles over {horizon_s}s to {}",
        records.len(),
        args.vehicles,
        args.out.display()
    );
    println!(
        "trace: {} ({} vehicles, {horizon_s}s)",
        args.out.display(),
        args.vehicles
    );
    Ok(EXIT_OK)
}
