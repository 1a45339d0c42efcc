mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use fedba::fl::Execution;
use fedba::harness::{
    read_metrics, run_experiment, run_with_data, summarize, write_metrics, Algorithm, ExperimentConfig, ModelKind,
    CSV_HEADER,
};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn small_config(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        data_dir: common::mnist_sample_dir(),
        model: ModelKind::Mlp,
        train_subset: Some(1000),
        num_clients: 5,
        per_client_count: 200,
        rounds: 3,
        out_path: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn zero_rounds_yield_a_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/metrics.csv");
    let cfg = ExperimentConfig {
        rounds: 0,
        ..small_config(&out)
    };
    let records = run_experiment(&cfg).unwrap();
    assert!(records.is_empty());
    write_metrics(&records, &out).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn records_survive_a_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let cfg = ExperimentConfig {
        eval_every: 2,
        ..small_config(&out)
    };
    let (train, test) = common::mnist_sample();
    let records = run_with_data(&cfg, &train, &test, Execution::Sequential).unwrap();
    // Rounds 2 and 3 (the last round is always evaluated).
    assert_eq!(records.iter().map(|r| r.round).collect::<Vec<_>>(), vec![2, 3]);
    write_metrics(&records, &out).unwrap();
    let back = read_metrics(&out).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in records.iter().zip(&back) {
        assert_eq!(a.round, b.round);
        assert_eq!(a.algorithm, b.algorithm);
        assert!((a.test_accuracy - b.test_accuracy).abs() <= 1e-8 * a.test_accuracy.abs());
        assert!((a.weight_entropy - b.weight_entropy).abs() <= 1e-8 * a.weight_entropy.abs().max(1e-300));
    }
    let bytes = fs::read(&out).unwrap();
    write_metrics(&back, &out).unwrap();
    assert_eq!(fs::read(&out).unwrap(), bytes);

    let summary = summarize(&records).unwrap();
    assert_eq!(summary.final_round, 3);
    assert_eq!(summary.algorithm, Algorithm::FedBa);
}

#[test]
fn cli_run_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_fedba"))
        .current_dir(repo_root())
        .args(["run", "--config", "configs/mnist-desk.conf", "--rounds", "2", "--algorithm", "fedavg"])
        .args(["--seed", "4", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "round,algorithm,seed,test_accuracy,test_loss,global_train_loss,min_weight,max_weight,weight_entropy,mean_sq_distance"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,fedavg,4,"));
    assert!(lines[2].starts_with("2,fedavg,4,"));

    let summary = Command::new(env!("CARGO_BIN_EXE_fedba"))
        .args(["summarize", "--in"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(summary.status.success());
    let stdout = String::from_utf8(summary.stdout).unwrap();
    assert!(stdout.contains("fedavg"), "{stdout}");
}

#[test]
fn cli_reports_configuration_errors() {
    let output = Command::new(env!("CARGO_BIN_EXE_fedba"))
        .args(["run", "--set", "sample_rate=0"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("sample_rate"), "{stderr}");
}
