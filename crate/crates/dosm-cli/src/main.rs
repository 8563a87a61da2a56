//! `dosm` — scenario generation, model training, policy runs, and result
//! comparison for the vehicular-edge service lifecycle simulator.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime error, 3 when a
//! run completed but over half of its optimization solves were infeasible.
//! Set `DOSM_LOG` (e.g. `DOSM_LOG=debug`) to control logging.

mod cmd_compare;
mod cmd_generate;
mod cmd_run;
mod cmd_train;
mod error;
mod io_util;

use clap::{Parser, Subcommand};

use crate::cmd_compare::{cmd_compare, CompareArgs};
use crate::cmd_generate::{cmd_generate, GenerateArgs};
use crate::cmd_run::{cmd_run, RunArgs};
use crate::cmd_train::{cmd_train, TrainArgs};
use crate::error::EXIT_VALIDATION;

#[derive(Debug, Parser)]
#[command(
    name = "dosm",
    version,
    about = "Vehicular edge service lifecycle simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic vehicle trace.
    Generate(GenerateArgs),
    /// Train forecaster or critic models and write a checkpoint.
    Train(TrainArgs),
    /// Run one or more placement policies over a scenario and trace.
    Run(RunArgs),
    /// Compare summaries produced by `run`.
    Compare(CompareArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DOSM_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version exit 0 via clap; anything else is a
            // validation failure.
            if e.use_stderr() {
                let _ = e.print();
                std::process::exit(EXIT_VALIDATION);
            }
            let _ = e.print();
            std::process::exit(0);
        }
    };

    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
