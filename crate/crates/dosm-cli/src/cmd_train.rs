//! `dosm train` — fit the demand forecasters or the per-service critics
//! offline and write a reloadable checkpoint plus a loss curve CSV.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use dosm_core::checkpoint::Checkpoint;
use dosm_core::config::Scenario;
use dosm_core::critic::{train_critic, CriticConfig, ValueNet};
use dosm_core::metrics::losses_to_csv;
use dosm_core::predictor::{GruConfig, GruModel};
use dosm_core::seeds;
use dosm_core::sim::collect_experiences;
use dosm_core::trace::demand_history;

use crate::error::{runtime, validation, CliError, EXIT_OK};
use crate::io_util::{load_scenario, load_vehicles, save_checkpoint, write_output};

/// Upper bound on GRU epochs so the loss CSV stays at one page
/// (one row per epoch).
const MAX_GRU_EPOCHS: usize = 150;

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(subcommand)]
    pub component: TrainComponent,
}

#[derive(Debug, Subcommand)]
pub enum TrainComponent {
    /// Train one demand forecaster per service.
    Gru(TrainCommonArgs),
    /// Train one state-value critic per service.
    Critic(TrainCommonArgs),
}

#[derive(Debug, Args)]
pub struct TrainCommonArgs {
    /// Scenario TOML (bundled default when omitted).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Service catalog TOML overriding the scenario's [[service]] list.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Vehicle trace: an x/y CSV file or a lat/lon cab directory.
    #[arg(long)]
    pub trace: PathBuf,
    /// Seed for catalog resolution, service binding, and initialization.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Training epochs for the forecaster (scenario default when omitted).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Training episodes for the critic (scenario default when omitted).
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Output directory for the checkpoint and loss CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_train(args: &TrainArgs) -> Result<i32, CliError> {
    match &args.component {
        TrainComponent::Gru(common) => train_gru(common),
        TrainComponent::Critic(common) => train_critics(common),
    }
}

fn train_gru(args: &TrainCommonArgs) -> Result<i32, CliError> {
    if args.episodes.is_some() {
        return Err(validation(
            "--episodes applies to `train critic`, not `train gru`",
        ));
    }
    let scenario = load_scenario(args.scenario.as_deref(), args.catalog.as_deref())?;
    let epochs = args.epochs.unwrap_or(scenario.gru.epochs);
    if epochs == 0 || epochs > MAX_GRU_EPOCHS {
        return Err(validation(format!(
            "--epochs must be in 1..={MAX_GRU_EPOCHS}, got {epochs}"
        )));
    }
    let services = scenario
        .resolve_services(args.seed)
        .map_err(|e| validation(format!("scenario: {e}")))?;
    let vehicles = load_vehicles(&scenario, &args.trace, args.seed)?;
    let history = demand_history(
        &vehicles,
        &scenario.edges,
        &scenario.network,
        services.len(),
    );

    let mut models = Vec::with_capacity(services.len());
    let mut per_service_losses = Vec::with_capacity(services.len());
    for svc in &services {
        let model_seed = seeds::sub_seed(&format!("gru-{}", svc.id), args.seed);
        let mut model = GruModel::new(gru_config(&scenario), model_seed);
        let losses = model
            .train(&history[svc.id], epochs, scenario.gru.stride, model_seed)
            .map_err(|e| runtime(format!("training forecaster for {}: {e}", svc.name)))?;
        log::info!(
            "service {} ({}): epoch 1 loss {:.6} -> epoch {} loss {:.6}",
            svc.id,
            svc.name,
            losses.first().copied().unwrap_or(f64::NAN),
            losses.len(),
            losses.last().copied().unwrap_or(f64::NAN)
        );
        per_service_losses.push(losses);
        models.push(model);
    }

    let mean_losses = mean_curve(&per_service_losses, epochs);
    write_output(
        &args.out.join("gru_loss.csv"),
        &losses_to_csv("epoch", &mean_losses),
    )?;
    let ckpt_path = args.out.join("gru_checkpoint.json");
    save_checkpoint(&ckpt_path, &Checkpoint::for_gru(models, args.seed))?;
    println!(
        "gru checkpoint: {} ({} services, {} epochs)",
        ckpt_path.display(),
        services.len(),
        epochs
    );
    Ok(EXIT_OK)
}

fn train_critics(args: &TrainCommonArgs) -> Result<i32, CliError> {
    if args.epochs.is_some() {
        return Err(validation(
            "--epochs applies to `train gru`, not `train critic`",
        ));
    }
    let scenario = load_scenario(args.scenario.as_deref(), args.catalog.as_deref())?;
    let episodes = args.episodes.unwrap_or(scenario.critic.episodes);
    if episodes == 0 {
        return Err(validation("--episodes must be at least 1"));
    }
    let services = scenario
        .resolve_services(args.seed)
        .map_err(|e| validation(format!("scenario: {e}")))?;
    let vehicles = load_vehicles(&scenario, &args.trace, args.seed)?;

    // Gather experiences by replaying the scenario without re-optimization,
    // then fit each service's critic on its own replay buffer.
    let buffers = collect_experiences(&scenario, &services, &vehicles, args.seed)
        .map_err(|e| runtime(format!("experience collection: {e}")))?;
    let input_dim = 2 * scenario.edges.len() * services.len() + services.len();
    let mut critics = Vec::with_capacity(services.len());
    let mut per_service_losses = Vec::new();
    for svc in &services {
        let model_seed = seeds::sub_seed(&format!("critic-{}", svc.id), args.seed);
        let mut net = ValueNet::new(critic_config(&scenario, input_dim), model_seed);
        if buffers[svc.id].is_empty() {
            log::warn!(
                "service {} ({}) saw no demand; critic left at init",
                svc.id,
                svc.name
            );
        } else {
            let losses = train_critic(
                &mut net,
                &buffers[svc.id],
                episodes,
                scenario.critic.iterations,
                scenario.critic.batch_size,
                model_seed,
            )
            .map_err(|e| runtime(format!("training critic for {}: {e}", svc.name)))?;
            per_service_losses.push(losses);
        }
        critics.push(net);
    }

    let mean_losses = mean_curve(&per_service_losses, episodes);
    write_output(
        &args.out.join("critic_loss.csv"),
        &losses_to_csv("episode", &mean_losses),
    )?;
    let ckpt_path = args.out.join("critic_checkpoint.json");
    save_checkpoint(&ckpt_path, &Checkpoint::for_critics(critics, args.seed))?;
    println!(
        "critic checkpoint: {} ({} services, {} episodes)",
        ckpt_path.display(),
        services.len(),
        episodes
    );
    Ok(EXIT_OK)
}

pub fn gru_config(scenario: &Scenario) -> GruConfig {
    GruConfig {
        input_dim: scenario.edges.len(),
        gru_units: scenario.gru.gru_units.clone(),
        fc_units: scenario.gru.fc_units.clone(),
        seq_len: scenario.gru.seq_len,
        horizon: scenario.gru.horizon(),
        learning_rate: scenario.gru.learning_rate,
    }
}

pub fn critic_config(scenario: &Scenario, input_dim: usize) -> CriticConfig {
    CriticConfig {
        input_dim,
        hidden: scenario.critic.hidden.clone(),
        learning_rate: scenario.critic.learning_rate,
    }
}

/// Mean loss per step across services (services that trained fewer steps
/// simply stop contributing).
fn mean_curve(curves: &[Vec<f64>], steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            let (sum, n) = curves
                .iter()
                .filter_map(|c| c.get(i))
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n > 0 {
                sum / n as f64
            } else {
                0.0
            }
        })
        .collect()
}
