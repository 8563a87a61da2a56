//! `dosm compare` — tabulate two or more run summaries side by side and
//! flag suspicious relationships (a frame-based policy migrating more than
//! the always-migrate baseline points at a broken setup).

use std::path::PathBuf;

use clap::Args;
use dosm_core::config::SCHEMA_VERSION;
use dosm_core::metrics::{compare_to_csv, compare_to_table, CompareRow};
use dosm_core::sim::{Policy, RunSummary};

use crate::error::{validation, CliError, EXIT_OK};
use crate::io_util::{read_input, write_output};

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Two or more summary JSON files from `dosm run`.
    #[arg(required = true, num_args = 2..)]
    pub summaries: Vec<PathBuf>,
    /// Also write the comparison table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32, CliError> {
    let mut loaded: Vec<RunSummary> = Vec::with_capacity(args.summaries.len());
    for path in &args.summaries {
        let summary: RunSummary = serde_json::from_str(&read_input(path)?)
            .map_err(|e| validation(format!("summary {}: {e}", path.display())))?;
        if summary.schema_version != SCHEMA_VERSION {
            return Err(validation(format!(
                "summary {}: schema version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                summary.schema_version
            )));
        }
        loaded.push(summary);
    }

    let rows: Vec<CompareRow> = loaded.iter().map(CompareRow::from).collect();
    print!("{}", compare_to_table(&rows));

    for anomaly in find_anomalies(&loaded) {
        println!("{anomaly}");
    }

    if let Some(out) = &args.out {
        write_output(out, &compare_to_csv(&rows))?;
    }
    Ok(EXIT_OK)
}

/// A frame-cadence policy should migrate no more than the every-slot
/// always-migrate baseline on the same seed.
fn find_anomalies(summaries: &[RunSummary]) -> Vec<String> {
    let mut notes = Vec::new();
    for dosm in summaries.iter().filter(|s| s.policy == Policy::Dosm) {
        for am in summaries
            .iter()
            .filter(|s| s.policy == Policy::Am && s.seed == dosm.seed)
        {
            if dosm.total_migrations > am.total_migrations {
                notes.push(format!(
                    "anomaly: DOSM migrated {} times but AM only {} on seed {}",
                    dosm.total_migrations, am.total_migrations, dosm.seed
                ));
            }
        }
    }
    notes
}
