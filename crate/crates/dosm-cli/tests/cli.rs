//! Black-box tests of the `dosm` binary: the exit-code contract, argument
//! validation, and the generate → run → compare pipeline.

use std::path::Path;
use std::process::{Command, Output};

fn dosm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dosm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary spawns")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const PIPELINE_SCENARIO: &str = r#"
schema_version = 1
name = "pipeline"

[network]
bandwidth_hz = 1e6
tx_power_dbm = 40.0
noise_power_dbm = -100.0
backhaul_bps = 1e9
user_context_bytes = 1e6
propagation_speed_mps = 3e8
slot_seconds = 5.0
horizon_seconds = 100.0
frame_slots = 5
q_threshold = 0.5
util_high_pct = 90.0
util_low_pct = 30.0
region_side_m = 6000.0

[edges]
layout = "grid"
count = 4
cpu_hz = 1e10
storage_capacity_bytes = 2000000000
storage_used_bytes = 0

[placement]
initial_instances = 2

[sim]
warmup_slots = 2

[gru]
gru_units = [4]
fc_units = []
seq_len = 6
learning_rate = 1e-3
epochs = 2
stride = 1

[critic]
hidden = [8]
learning_rate = 1e-3
buffer_capacity = 400
batch_size = 8
episodes = 2
iterations = 2

[[service]]
name = "Alpha"
delay_threshold_s = 0.5
input_bits = 3200
compute_intensity = 36000
layer_bytes_min = 50000000
layer_bytes_max = 100000000
capacity = 30

[[service]]
name = "Beta"
delay_threshold_s = 0.2
input_bits = 1800
compute_intensity = 42000
layer_bytes_min = 50000000
layer_bytes_max = 100000000
capacity = 30
"#;

/// One service whose instance layer barely fits an edge: every migration
/// fails the storage constraint once user context is added, so an AM run
/// is dominated by infeasible solves.
const CRAMPED_SCENARIO: &str = r#"
schema_version = 1
name = "cramped"

[network]
bandwidth_hz = 1e6
tx_power_dbm = 40.0
noise_power_dbm = -100.0
backhaul_bps = 1e9
user_context_bytes = 1e6
propagation_speed_mps = 3e8
slot_seconds = 5.0
horizon_seconds = 50.0
frame_slots = 5
q_threshold = 0.5
util_high_pct = 90.0
util_low_pct = 30.0
region_side_m = 2000.0

[edges]
layout = "grid"
count = 2
cpu_hz = 1e10
storage_capacity_bytes = 152000000
storage_used_bytes = 0

[placement]
initial_instances = 1

[sim]
warmup_slots = 2

[critic]
hidden = [8]
learning_rate = 1e-3
buffer_capacity = 100
batch_size = 4
episodes = 1
iterations = 1

[gru]
gru_units = [4]
fc_units = []
seq_len = 4
learning_rate = 1e-3
epochs = 1
stride = 1

[[service]]
name = "Bulky"
delay_threshold_s = 1.0
input_bits = 1200
compute_intensity = 30000
layer_bytes_min = 150000000
layer_bytes_max = 150000000
capacity = 30
"#;

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let help = dosm(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    let text = stdout(&help);
    for sub in ["generate", "train", "run", "compare"] {
        assert!(text.contains(sub), "--help must list `{sub}`:\n{text}");
    }
    assert_eq!(dosm(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dosm(&["frobnicate"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
    // `run` without its required flags is a usage error, not a crash.
    let missing = dosm(&["run", "--policies", "NM"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("--trace"));
}

#[test]
fn generate_rejects_zero_vehicles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dosm(
        &["generate", "--vehicles", "0", "--out", "t.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"), "stderr: {}", stderr(&out));
}

#[test]
fn run_requires_models_for_learning_policies() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("s.toml"), PIPELINE_SCENARIO).unwrap();
    let gen = dosm(
        &[
            "generate",
            "--scenario",
            "s.toml",
            "--vehicles",
            "10",
            "--out",
            "t.csv",
        ],
        root,
    );
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));

    let run = dosm(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--trace",
            "t.csv",
            "--policies",
            "DRL",
            "--out",
            "o",
        ],
        root,
    );
    assert_eq!(run.status.code(), Some(1));
    let err = stderr(&run);
    assert!(
        err.contains("DRL") && err.contains("critic"),
        "error must name the policy and the missing component: {err}"
    );
}

#[test]
fn missing_trace_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dosm(
        &[
            "run",
            "--trace",
            "nope.csv",
            "--policies",
            "NM",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pipeline_run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("s.toml"), PIPELINE_SCENARIO).unwrap();

    let gen = dosm(
        &[
            "generate",
            "--scenario",
            "s.toml",
            "--seed",
            "3",
            "--vehicles",
            "24",
            "--out",
            "t.csv",
        ],
        root,
    );
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));
    assert!(stdout(&gen).contains("t.csv"));

    let run = dosm(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--trace",
            "t.csv",
            "--policies",
            "NM,AM",
            "--seed",
            "3",
            "--out",
            "out",
        ],
        root,
    );
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let log = stdout(&run);
    assert!(
        log.contains("NM") && log.contains("AM"),
        "per-policy summaries:\n{log}"
    );

    let nm = root.join("out/nm_seed3_summary.json");
    let am = root.join("out/am_seed3_summary.json");
    assert!(nm.is_file() && am.is_file());

    let cmp = dosm(
        &[
            "compare",
            "out/nm_seed3_summary.json",
            "out/am_seed3_summary.json",
            "--out",
            "cmp.csv",
        ],
        root,
    );
    assert_eq!(cmp.status.code(), Some(0), "{}", stderr(&cmp));
    let table = stdout(&cmp);
    assert!(
        table.contains("NM") && table.contains("AM"),
        "table:\n{table}"
    );
    assert!(table.contains("policy"), "header row expected:\n{table}");

    let csv = std::fs::read_to_string(root.join("cmp.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "header + two policies:\n{csv}");
    assert!(rows[0].starts_with("policy,seed,"));
}

#[test]
fn catalog_override_replaces_services() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("s.toml"), PIPELINE_SCENARIO).unwrap();
    std::fs::write(
        root.join("cat.toml"),
        r#"
schema_version = 1

[[service]]
name = "Gamma"
delay_threshold_s = 0.3
input_bits = 2000
compute_intensity = 30000
layer_bytes_min = 50000000
layer_bytes_max = 80000000
capacity = 25
"#,
    )
    .unwrap();
    dosm(
        &[
            "generate",
            "--scenario",
            "s.toml",
            "--vehicles",
            "12",
            "--out",
            "t.csv",
        ],
        root,
    );

    // The catalog's single service replaces the scenario's two.
    let run = dosm(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--catalog",
            "cat.toml",
            "--trace",
            "t.csv",
            "--policies",
            "NM",
            "--out",
            "out",
        ],
        root,
    );
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let summary = std::fs::read_to_string(root.join("out/nm_seed1_summary.json")).unwrap();
    assert!(
        summary.contains("\"num_services\": 1"),
        "summary:\n{summary}"
    );

    let bad = dosm(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--catalog",
            "s.toml",
            "--trace",
            "t.csv",
            "--policies",
            "NM",
            "--out",
            "out2",
        ],
        root,
    );
    assert_eq!(
        bad.status.code(),
        Some(1),
        "a scenario file is not a catalog"
    );
}

#[test]
fn compare_rejects_single_summary_and_bad_schema() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("s.toml"), PIPELINE_SCENARIO).unwrap();
    dosm(
        &[
            "generate",
            "--scenario",
            "s.toml",
            "--vehicles",
            "8",
            "--out",
            "t.csv",
        ],
        root,
    );
    let run = dosm(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--trace",
            "t.csv",
            "--policies",
            "NM",
            "--out",
            "out",
        ],
        root,
    );
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));

    let single = dosm(&["compare", "out/nm_seed1_summary.json"], root);
    assert_eq!(
        single.status.code(),
        Some(1),
        "one summary is not comparable"
    );

    let summary = std::fs::read_to_string(root.join("out/nm_seed1_summary.json")).unwrap();
    let future = summary.replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
    assert_ne!(
        summary, future,
        "summary JSON must carry its schema version"
    );
    std::fs::write(root.join("future.json"), future).unwrap();
    let cmp = dosm(
        &["compare", "future.json", "out/nm_seed1_summary.json"],
        root,
    );
    assert_eq!(cmp.status.code(), Some(1));
    assert!(
        stderr(&cmp).contains("schema version 99"),
        "{}",
        stderr(&cmp)
    );
}

#[test]
fn infeasible_dominated_run_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("s.toml"), CRAMPED_SCENARIO).unwrap();
    let gen = dosm(
        &[
            "generate",
            "--scenario",
            "s.toml",
            "--seed",
            "2",
            "--vehicles",
            "20",
            "--out",
            "t.csv",
        ],
        root,
    );
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));

    let run = dosm(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--trace",
            "t.csv",
            "--policies",
            "AM",
            "--seed",
            "2",
            "--out",
            "out",
        ],
        root,
    );
    assert_eq!(
        run.status.code(),
        Some(3),
        "storage-bound migrations must dominate the AM run\nstdout:\n{}\nstderr:\n{}",
        stdout(&run),
        stderr(&run)
    );
    assert!(stderr(&run).contains("infeasible"), "{}", stderr(&run));
    // The run still completes and writes its artifacts.
    assert!(root.join("out/am_seed2_summary.json").is_file());
}
