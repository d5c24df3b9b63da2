use std::path::Path;
use std::process::{Command, Output};

use parlab_cli::{Experiment, ExperimentConfig};
use serde_json::Value;

fn parlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.ini");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn payload(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timing").expect("timing is reported");
    v
}

const SMALL_VERIFY: &str = "[verify]\nd = 2, 3\nq = 3, 5\nsamples = 10\nmachinery_samples = 5\n";

#[test]
fn verify_passes_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_VERIFY);
    let out = dir.path().join("verify.json");
    let res = parlab(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let v = payload(&out);
    assert_eq!(v["summary"]["failed"], 0);
    assert_eq!(v["cases"].as_array().unwrap().len(), 4);
}

#[test]
fn corrupted_gauss_sum_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL_VERIFY}fault_injection = gauss_sum\n"));
    let out = dir.path().join("verify.json");
    let res = parlab(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("check failed: dsigma_explicit"), "{stderr}");
    let failed = payload(&out)["summary"]["failed_checks"].clone();
    assert!(failed.as_array().unwrap().iter().all(|f| f.as_str().unwrap().starts_with("dsigma_explicit")));
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\nq =\n");
    let res = parlab(&["verify", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no cases"));
}

#[test]
fn grid_cap_and_bad_input_exit_with_two() {
    assert_eq!(parlab(&["verify", "--grid-cap", "100"]).status.code(), Some(2));
    assert_eq!(parlab(&["scan", "--format", "yaml"]).status.code(), Some(2));
    assert_eq!(parlab(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scan]\nq = 3, 5\n");
    assert_eq!(parlab(&["scan", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(parlab(&["scan", "--config", "/nonexistent/run.ini"]).status.code(), Some(2));
}

#[test]
fn identical_seeds_give_identical_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL_VERIFY}[energy]\nd = 4\nq = 3\nsizes = 5, 9\ntrials = 4\n[scan]\nq = 3, 5, 7\n"),
    );
    let out = dir.path().join("out.json");
    for cmd in ["verify", "energy", "scan"] {
        let mut payloads = Vec::new();
        for jobs in ["1", "3"] {
            let args = [
                cmd,
                "--config",
                &cfg,
                "--seed",
                "7",
                "--format",
                "json",
                "--jobs",
                jobs,
                "--out",
                out.to_str().unwrap(),
            ];
            assert_eq!(parlab(&args).status.code(), Some(0), "{cmd}");
            payloads.push(payload(&out));
        }
        assert_eq!(payloads[0], payloads[1], "{cmd}");
        assert_eq!(payloads[0]["config"]["seed"], 7);
    }
}

#[test]
fn scan_writes_csv_rows() {
    let res = parlab(&["scan"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,q,p_num,p_den,r_num,r_den,value,method,restarts,iterations,converged,seed,slope"
    );
    assert_eq!(lines.count(), 15);
}

#[test]
fn report_matches_golden_tables() {
    let res = parlab(&["report"]);
    assert_eq!(res.status.code(), Some(0));
    let golden = include_str!("golden/tables.md");
    assert_eq!(String::from_utf8(res.stdout).unwrap(), golden);
    let csv = parlab(&["report", "--format", "csv"]);
    let rows = String::from_utf8(csv.stdout).unwrap().lines().count() - 1;
    assert_eq!(rows, golden.lines().filter(|l| l.starts_with("| ") && !l.starts_with("| p |")).count());
}

#[test]
fn config_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(Experiment::Witness);
    cfg.seed = 99;
    cfg.out = Some(dir.path().join("w.csv"));
    let path = write_config(dir.path(), &cfg.emit());
    let back = ExperimentConfig::parse(&std::fs::read_to_string(path).unwrap(), Experiment::Witness).unwrap();
    assert_eq!(back, cfg);
}
