//! Smallest end-to-end library use: parse a scenario, synthesize a trace,
//! and run one policy. Mirrors the snippet in the top-level README.
//!
//! ```sh
//! cargo run --example minimal_run -p dosm-core -- scenario.toml
//! ```
//! (falls back to the bundled default scenario when no path is given)

use dosm_core::config::{default_scenario_toml, Scenario};
use dosm_core::sim::{run_scenario, ModelSet, Policy, RunOptions};
use dosm_core::trace::{bind_services, generate_trace, GenerateOptions, MobilityModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 7;
    let toml = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => default_scenario_toml().to_string(),
    };
    let scenario = Scenario::from_toml_str(&toml, None)?;
    let services = scenario.resolve_services(seed)?;

    let records = generate_trace(
        seed,
        &GenerateOptions {
            num_vehicles: 80,
            horizon_s: scenario.network.horizon_seconds,
            region_side_m: scenario.network.region_side_m,
            step_s: scenario.network.slot_seconds,
            model: MobilityModel::RandomWaypoint,
        },
    )?;
    let vehicles = bind_services(
        &records,
        services.len(),
        scenario.service_mix.as_deref(),
        seed,
    )?;

    // NM and AM run without trained models; DRL and DOSM would need a
    // ModelSet carrying critics (and a GRU forecaster for DOSM).
    let run = run_scenario(
        Policy::Am,
        &scenario,
        &services,
        &vehicles,
        &mut ModelSet::none(),
        seed,
        &RunOptions::default(),
    )?;

    println!(
        "{} on '{}': mean delay {:.6} s, {} migrations over {} slots",
        run.summary.policy,
        scenario.name,
        run.summary.mean_service_delay_s,
        run.summary.total_migrations,
        run.summary.slots,
    );
    Ok(())
}
