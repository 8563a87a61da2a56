//! `dosm run` — execute one or more policies over a scenario and trace,
//! writing per-slot metrics, a summary, a decision/solve event log, and a
//! wall-clock sidecar per policy.

use std::path::PathBuf;

use clap::Args;
use dosm_core::metrics::{slots_to_csv, summary_to_json, timings_to_csv};
use dosm_core::sim::{run_scenario, ModelSet, Policy, RunOptions, ScenarioRun, SimError};

use crate::error::{runtime, validation, CliError, EXIT_INFEASIBLE, EXIT_OK};
use crate::io_util::{
    load_checkpoints, load_scenario, load_vehicles, parse_policies, require_models, write_output,
    LoadedCheckpoints,
};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario TOML (bundled default when omitted).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Service catalog TOML overriding the scenario's [[service]] list.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Vehicle trace: an x/y CSV file or a lat/lon cab directory.
    #[arg(long)]
    pub trace: PathBuf,
    /// Comma-separated policies to run (NM, AM, DRL, DOSM).
    #[arg(long)]
    pub policies: String,
    /// Run seed: catalog resolution, service binding, online learning.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Model checkpoint file; repeat for multiple components.
    #[arg(long)]
    pub checkpoint: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_run(args: &RunArgs) -> Result<i32, CliError> {
    let policies = parse_policies(&args.policies)?;
    let scenario = load_scenario(args.scenario.as_deref(), args.catalog.as_deref())?;
    let services = scenario
        .resolve_services(args.seed)
        .map_err(|e| validation(format!("scenario: {e}")))?;
    let vehicles = load_vehicles(&scenario, &args.trace, args.seed)?;
    let loaded = load_checkpoints(&args.checkpoint)?;
    for &policy in &policies {
        require_models(policy, &loaded)?;
    }

    let mut dominated: Vec<Policy> = Vec::new();
    for &policy in &policies {
        let mut models = models_for(policy, &loaded);
        let run = run_scenario(
            policy,
            &scenario,
            &services,
            &vehicles,
            &mut models,
            args.seed,
            &RunOptions {
                collect_events: true,
            },
        )
        .map_err(map_sim_error)?;
        write_artifacts(&args.out, &run)?;
        let s = &run.summary;
        println!(
            "{policy} seed {}: mean delay {:.6}s, {} migrations, comp load {:.3}%, \
             migration load {:.3}%, {} infeasible of {} solves",
            s.seed,
            s.mean_service_delay_s,
            s.total_migrations,
            s.computation_load_pct,
            s.migration_load_pct,
            s.total_infeasible_solves,
            s.total_optimization_runs,
        );
        if s.total_optimization_runs > 0
            && 2 * s.total_infeasible_solves > s.total_optimization_runs
        {
            dominated.push(policy);
        }
    }

    if !dominated.is_empty() {
        let names: Vec<String> = dominated.iter().map(|p| p.to_string()).collect();
        eprintln!(
            "warning: over half of all optimization solves were infeasible for {}",
            names.join(", ")
        );
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(EXIT_OK)
}

fn models_for(policy: Policy, loaded: &LoadedCheckpoints) -> ModelSet {
    ModelSet {
        gru: if policy.needs_gru() {
            loaded.gru.clone()
        } else {
            None
        },
        critics: if policy.needs_critics() {
            loaded.critics.clone()
        } else {
            None
        },
    }
}

fn write_artifacts(out_dir: &std::path::Path, run: &ScenarioRun) -> Result<(), CliError> {
    let prefix = format!("{}_seed{}", run.policy.to_string().to_lowercase(), run.seed);
    write_output(
        &out_dir.join(format!("{prefix}_metrics.csv")),
        &slots_to_csv(&run.slots),
    )?;
    write_output(
        &out_dir.join(format!("{prefix}_timing.csv")),
        &timings_to_csv(&run.slots),
    )?;
    let summary =
        summary_to_json(&run.summary).map_err(|e| runtime(format!("serializing summary: {e}")))?;
    write_output(&out_dir.join(format!("{prefix}_summary.json")), &summary)?;

    let mut events = String::new();
    events.push_str(&format!(
        "{{\"event\":\"meta\",\"schema_version\":1,\"policy\":\"{}\",\"seed\":{}}}\n",
        run.policy, run.seed
    ));
    for event in &run.events {
        let line =
            serde_json::to_string(event).map_err(|e| runtime(format!("serializing event: {e}")))?;
        events.push_str(&line);
        events.push('\n');
    }
    write_output(&out_dir.join(format!("{prefix}_events.jsonl")), &events)
}

fn map_sim_error(e: SimError) -> CliError {
    match e {
        SimError::MissingModels { .. }
        | SimError::ModelShapeMismatch { .. }
        | SimError::UnknownPolicy { .. } => validation(e),
        other => runtime(other),
    }
}
