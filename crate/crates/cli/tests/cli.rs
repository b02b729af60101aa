//! End-to-end checks of the command-line interface and its file formats.

use std::path::Path;
use std::process::Command;

use gsemm_cli::io;

fn gsemm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gsemm"))
}

fn small_lisem_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("lisem.toml");
    std::fs::write(
        &path,
        r#"
[model]
variant = "lisem"
n_f = 40
n_h = 3
alpha_s = 0.125
alpha_c = 4.9

[memories]
seed = 3
cycles = [[0, 1, 2]]

[simulate]
duration = 40.0
record_every = 10

[retrieval]
max_time = 40.0

[fixed_points]
sweep_every = 100
"#,
    )
    .unwrap();
    path
}

#[test]
fn simulate_writes_csv_with_contracted_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_lisem_config(dir.path());
    let out = dir.path().join("traj.csv");
    let status = gsemm()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "time,m_1,m_2,m_3,E_total,E_assoc,E_seq,E_c,F,G");
    assert_eq!(text.lines().count(), 1 + 401);
}

#[test]
fn trajectory_csv_round_trips_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_lisem_config(dir.path());
    let out = dir.path().join("traj.csv");
    assert!(gsemm()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    let traj = io::read_trajectory_csv(&out).unwrap();
    assert_eq!(traj.len(), 401);
    assert!(traj.energies.is_some());
    let rewritten = dir.path().join("traj2.csv");
    io::write_trajectory_csv(&rewritten, &traj).unwrap();
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(&rewritten).unwrap()
    );
}

#[test]
fn matrix_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mat");
    let a = ndarray::Array2::from_shape_fn((3, 4), |(i, j)| {
        (i as f64 - 1.5) * 0.3711111111111 + j as f64 / 7.0
    });
    let b = ndarray::Array2::from_shape_fn((2, 2), |(i, j)| (i + j) as f64 * 1e-17 - 0.25);
    io::write_matrices(&path, &[&a, &b]).unwrap();
    let read = io::read_matrices(&path).unwrap();
    assert_eq!(read.len(), 2);
    assert_eq!(read[0], a);
    assert_eq!(read[1], b);
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = gsemm().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_config_exits_one() {
    let out = gsemm()
        .args(["simulate", "--config", "/nonexistent.toml", "--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_model_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        r#"
[model]
variant = "lisem"
n_f = 40
n_h = 3
alpha_s = -1.0
alpha_c = 4.9

[memories]
seed = 3
"#,
    )
    .unwrap();
    let out = gsemm()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--out", "/tmp/never.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = gsemm().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn capacity_writes_summary_json_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cap.json");
    let table = dir.path().join("cap.csv");
    let status = gsemm()
        .args([
            "capacity",
            "--variant",
            "dsem",
            "--k",
            "2",
            "--trials",
            "2",
            "--seed",
            "5",
            "--max-nf",
            "40",
            "--max-time-per-k",
            "60",
        ])
        .arg("--out")
        .arg(&json)
        .arg("--table")
        .arg(&table)
        .status()
        .unwrap();
    assert!(status.success());

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let entry = &parsed.as_array().unwrap()[0];
    assert_eq!(entry["variant"], "dsem");
    assert_eq!(entry["k"], 2);
    assert_eq!(entry["trials"], 2);
    assert!(entry["mean_min_nf"].is_number() || entry["mean_min_nf"].is_null());
    assert!(entry.get("std_min_nf").is_some());
    assert!(entry.get("saturated_count").is_some());
    assert_eq!(entry["per_trial"].as_array().unwrap().len(), 2);

    let table_text = std::fs::read_to_string(&table).unwrap();
    assert!(table_text.starts_with("variant,k,trials,mean_min_nf,std_min_nf,saturated_count"));
}

#[test]
fn learn_writes_synapses_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("learn.toml");
    std::fs::write(
        &cfg,
        r#"
[model]
variant = "dsem"
n_f = 20
n_h = 6
alpha_s = 1.0
alpha_c = 0.991

[memories]
seed = 11

[learn]
n_memories = 3
steps_per_memory = 40
epochs = 3
init_seed = 2
snapshot_every = 2
energy_record_every = 20
"#,
    )
    .unwrap();
    let out = dir.path().join("synapses.mat");
    let snaps = dir.path().join("snaps");
    let status = gsemm()
        .args(["learn", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("--snapshots")
        .arg(&snaps)
        .status()
        .unwrap();
    assert!(status.success());

    let matrices = io::read_matrices(&out).unwrap();
    assert_eq!(matrices.len(), 2);
    assert_eq!(matrices[0].dim(), (20, 6));
    assert_eq!(matrices[1].dim(), (6, 6));
    assert!(snaps.join("metrics.csv").exists());
    assert!(snaps.join("epoch_0000.mat").exists());
    assert!(snaps.join("epoch_0002.mat").exists());
    let metrics = std::fs::read_to_string(snaps.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 1 + 3);
}

#[test]
fn fixed_points_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_lisem_config(dir.path());
    let out = dir.path().join("fp.csv");
    let status = gsemm()
        .args(["fixed-points", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "time,iterations,residual,fp_m_1,fp_m_2,fp_m_3,fp_E_total"
    );
    assert!(text.lines().count() > 1);
}
