//! CSV/JSON rendering for run outputs.
//!
//! The per-slot metrics CSV is the determinism-bearing artifact: two runs
//! of the same (policy, scenario, trace, seed) must produce byte-identical
//! files. Wall-clock timings therefore live in a separate sidecar CSV that
//! is excluded from any equality comparison. Floats are written with Rust's
//! shortest round-trip `Display`, which is itself deterministic.

use serde::Serialize;

use crate::sim::{RunSummary, SlotMetrics};

/// Leading comment line carried by every CSV this module writes.
pub const CSV_SCHEMA_LINE: &str = "# schema_version=1";

/// Column header of the per-slot metrics CSV (no wall-clock column).
pub const SLOT_CSV_HEADER: &str = "slot,active_vehicles,mean_service_delay_s,\
total_migration_delay_s,services_migrated,services_migrated_pct,\
impacted_vehicles,optimization_runs,infeasible_solves";

/// Render per-slot metrics as CSV. Deterministic: excludes wall-clock.
pub fn slots_to_csv(slots: &[SlotMetrics]) -> String {
    let mut out = String::with_capacity(64 * (slots.len() + 2));
    out.push_str(CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str(SLOT_CSV_HEADER);
    out.push('\n');
    for m in slots {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            m.slot,
            m.active_vehicles,
            m.mean_service_delay_s,
            m.total_migration_delay_s,
            m.services_migrated,
            m.services_migrated_pct,
            m.impacted_vehicles,
            m.optimization_runs,
            m.infeasible_solves,
        ));
    }
    out
}

/// Render the wall-clock sidecar CSV (one row per slot).
pub fn timings_to_csv(slots: &[SlotMetrics]) -> String {
    let mut out = String::with_capacity(24 * (slots.len() + 2));
    out.push_str(CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str("slot,wallclock_s\n");
    for m in slots {
        out.push_str(&format!("{},{}\n", m.slot, m.wallclock_s));
    }
    out
}

/// Serialize a run summary as pretty JSON (trailing newline included).
pub fn summary_to_json(summary: &RunSummary) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

/// One comparison row distilled from a run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub policy: String,
    pub seed: u64,
    pub mean_service_delay_s: f64,
    pub total_migration_delay_s: f64,
    pub total_migrations: u64,
    pub computation_load_pct: f64,
    pub migration_load_pct: f64,
}

impl From<&RunSummary> for CompareRow {
    fn from(s: &RunSummary) -> Self {
        CompareRow {
            policy: s.policy.to_string(),
            seed: s.seed,
            mean_service_delay_s: s.mean_service_delay_s,
            total_migration_delay_s: s.total_migration_delay_s,
            total_migrations: s.total_migrations,
            computation_load_pct: s.computation_load_pct,
            migration_load_pct: s.migration_load_pct,
        }
    }
}

/// Render comparison rows as CSV.
pub fn compare_to_csv(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str(
        "policy,seed,mean_service_delay_s,total_migration_delay_s,\
total_migrations,computation_load_pct,migration_load_pct\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.policy,
            r.seed,
            r.mean_service_delay_s,
            r.total_migration_delay_s,
            r.total_migrations,
            r.computation_load_pct,
            r.migration_load_pct,
        ));
    }
    out
}

/// Render comparison rows as an aligned text table.
pub fn compare_to_table(rows: &[CompareRow]) -> String {
    let headers = [
        "policy",
        "seed",
        "mean_delay_s",
        "migration_delay_s",
        "migrations",
        "comp_load_pct",
        "mig_load_pct",
    ];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.policy.clone(),
                r.seed.to_string(),
                format!("{:.6}", r.mean_service_delay_s),
                format!("{:.6}", r.total_migration_delay_s),
                r.total_migrations.to_string(),
                format!("{:.3}", r.computation_load_pct),
                format!("{:.3}", r.migration_load_pct),
            ]
        })
        .collect();
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| {
            cells
                .iter()
                .map(|row| row[i].len())
                .chain([h.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, h) in headers.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        out.push_str(&format!("{:>width$}", h, width = widths[i]));
    }
    out.push('\n');
    for row in &cells {
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:>width$}", c, width = widths[i]));
        }
        out.push('\n');
    }
    out
}

/// Render training losses (one row per epoch or episode) as CSV.
pub fn losses_to_csv(unit: &str, losses: &[f64]) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str(&format!("{unit},loss\n"));
    for (i, loss) in losses.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, loss));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Policy;

    fn slot(slot: usize) -> SlotMetrics {
        SlotMetrics {
            slot,
            active_vehicles: 12,
            mean_service_delay_s: 0.012_345_678_901_234_5,
            total_migration_delay_s: 1.04,
            services_migrated: 1,
            services_migrated_pct: 12.5,
            impacted_vehicles: 3,
            optimization_runs: 8,
            infeasible_solves: 2,
            wallclock_s: 0.001_9,
        }
    }

    #[test]
    fn slot_csv_layout_and_roundtrip() {
        let csv = slots_to_csv(&[slot(0), slot(1)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_SCHEMA_LINE));
        assert_eq!(lines.next(), Some(SLOT_CSV_HEADER));
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], "0");
        // Shortest round-trip Display: parsing the field recovers the bits.
        let parsed: f64 = fields[2].parse().unwrap();
        assert_eq!(parsed, 0.012_345_678_901_234_5);
        assert!(!csv.contains("0.0019"), "wallclock leaked into metrics CSV");
    }

    #[test]
    fn timing_sidecar_has_wallclock() {
        let csv = timings_to_csv(&[slot(0)]);
        assert!(csv.contains("slot,wallclock_s"));
        assert!(csv.contains("0,0.0019"));
    }

    #[test]
    fn summary_json_is_versioned() {
        let summary = RunSummary {
            schema_version: 1,
            policy: Policy::Nm,
            seed: 7,
            slots: 150,
            num_services: 8,
            mean_service_delay_s: 0.5,
            total_migration_delay_s: 0.0,
            total_migrations: 0,
            total_optimization_runs: 0,
            total_infeasible_solves: 0,
            total_impacted_vehicles: 0,
            computation_load_pct: 0.0,
            migration_load_pct: 0.0,
        };
        let json = summary_to_json(&summary).unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"policy\": \"NM\""));
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["seed"], 7);
    }

    #[test]
    fn compare_table_aligns_and_csv_parses() {
        let a = RunSummary {
            schema_version: 1,
            policy: Policy::Dosm,
            seed: 1,
            slots: 150,
            num_services: 8,
            mean_service_delay_s: 0.011,
            total_migration_delay_s: 3.12,
            total_migrations: 3,
            total_optimization_runs: 24,
            total_infeasible_solves: 0,
            total_impacted_vehicles: 40,
            computation_load_pct: 2.0,
            migration_load_pct: 0.25,
        };
        let rows = vec![CompareRow::from(&a)];
        let table = compare_to_table(&rows);
        assert!(table.lines().next().unwrap().contains("policy"));
        assert!(table.contains("DOSM"));
        let csv = compare_to_csv(&rows);
        let data_line = csv.lines().nth(2).unwrap();
        assert_eq!(data_line.split(',').count(), 7);
        assert!(data_line.starts_with("DOSM,1,"));
    }

    #[test]
    fn loss_csv_rows_are_one_indexed() {
        let csv = losses_to_csv("epoch", &[0.5, 0.25]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "epoch,loss");
        assert_eq!(lines[2], "1,0.5");
        assert_eq!(lines[3], "2,0.25");
    }
}
