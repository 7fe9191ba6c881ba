//! End-to-end runs of the binary: the enumeration pipeline, built-in
//! catalogs and matrices, reproducibility, and the error contract.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bellcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellcomm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SWAP_TABLE: &str = r#"{
  "scenario": {"M": 2, "K": 2, "r": 1},
  "p": {
    "0,0": [["1", "0"], ["0", "0"]],
    "0,1": [["0", "0"], ["1", "0"]],
    "1,0": [["0", "1"], ["0", "0"]],
    "1,1": [["0", "0"], ["0", "1"]]
  }
}"#;

const CONSTANT_TABLE: &str = r#"{
  "scenario": {"M": 2, "K": 2, "r": 1},
  "p": {
    "0,0": [["1", "0"], ["0", "0"]],
    "0,1": [["1", "0"], ["0", "0"]],
    "1,0": [["1", "0"], ["0", "0"]],
    "1,1": [["1", "0"], ["0", "0"]]
  }
}"#;

#[test]
fn vertices_facets_classify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let v_path = dir.path().join("v.json");
    let h_path = dir.path().join("h.json");

    let out = bellcomm(&[
        "vertices", "--M", "2", "--K", "2", "--r", "1",
        "--picture", "probability", "--out", v_path.to_str().unwrap(),
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["points"], 112);
    let artifact = read_json(&v_path);
    assert_eq!(artifact["points"].as_array().unwrap().len(), 112);
    assert_eq!(artifact["picture"], "probability");
    assert_eq!(artifact["scenario"]["M"], 2);

    let out = bellcomm(&["facets", "--in", v_path.to_str().unwrap(), "--out", h_path.to_str().unwrap()]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["facets"], 48);
    assert_eq!(report["result"]["summary"]["equations"], 0);

    let out = bellcomm(&["classify", "--facets", h_path.to_str().unwrap(), "--catalog", "p221"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["perfect"], true);

    let out = bellcomm(&["extreme", "--in", h_path.to_str().unwrap()]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["points"], 112);

    let out = bellcomm(&[
        "verify", "--facets", h_path.to_str().unwrap(), "--points", v_path.to_str().unwrap(),
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["allFacets"], true);
    let first = &report["result"]["reports"][0];
    assert_eq!(first["tightRank"], 11);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["vertices", "--M", "2", "--K", "2", "--r", "0", "--picture", "correlation"];
    let a = bellcomm(&args);
    let b = bellcomm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bound_reports_the_exact_sum() {
    let out = bellcomm(&["bound", "--matrix", "M1", "--k", "4"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["sum"], "155/162");
    assert_eq!(report["result"]["certified"], true);
    assert_eq!(report["config"]["matrix"], "M1");

    let out = bellcomm(&["bound", "--matrix", "M2", "--k", "1"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["certified"], false);
    assert_eq!(report["result"]["sum"], "15/11");
}

#[test]
fn check_swap_table_against_builtin_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swap.json");
    std::fs::write(&path, SWAP_TABLE).unwrap();
    let out = bellcomm(&["check", "--in", path.to_str().unwrap(), "--catalog", "p221"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["member"], false);
    // maximal violation margin of the canonical form is 2
    assert_eq!(report["result"]["maxViolation"]["margin"], "2");
}

#[test]
fn catalog_export_sizes() {
    let out = bellcomm(&["catalog", "--name", "corr3"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["members"], 498);
    let out = bellcomm(&["catalog", "--name", "p221"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["members"], 48);
}

#[test]
fn simulate_constant_table_counts_everything_in_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, CONSTANT_TABLE).unwrap();
    let out = bellcomm(&[
        "simulate", "--table", path.to_str().unwrap(),
        "--direction", "AtoB", "--samples", "500", "--seed", "1",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["tvDistance"], 0.0);
    assert_eq!(report["result"]["messageBits"], 1);
    assert_eq!(report["result"]["counts"]["0,1"][0][0], 500);
}

#[test]
fn quantum_short_run_reports_config_and_passes() {
    let out = bellcomm(&[
        "quantum", "--catalog", "corr3", "--trials", "20",
        "--dims", "2,3", "--seed", "9", "--tol", "1e-9",
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["result"]["pass"], true);
}

#[test]
fn text_format_renders() {
    let out = bellcomm(&["bound", "--matrix", "M2", "--k", "5", "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("certified"));
    assert!(text.contains("155103/161051"));
}

#[test]
fn usage_errors_exit_2() {
    let out = bellcomm(&["vertices", "--M", "2", "--r", "1", "--picture", "probability", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    // stochastic subcommands demand an explicit seed
    let out = bellcomm(&["quantum", "--catalog", "corr3", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = bellcomm(&["catalog", "--name", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_USAGE]"));
}

#[test]
fn domain_errors_exit_1_with_code() {
    let out = bellcomm(&["facets", "--in", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_IO]"));

    let out = bellcomm(&[
        "vertices", "--M", "3", "--K", "2", "--r", "1",
        "--picture", "probability", "--cap", "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_SIZE]"));

    // signaling table rejected as a precondition failure
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swap.json");
    std::fs::write(&path, SWAP_TABLE).unwrap();
    let out = bellcomm(&[
        "simulate", "--table", path.to_str().unwrap(),
        "--direction", "AtoB", "--samples", "10", "--seed", "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_PRECONDITION]"));
}

#[test]
fn artifact_files_round_trip_through_the_reader() {
    let dir = tempfile::tempdir().unwrap();
    let h_path = dir.path().join("local.json");
    let v_path = dir.path().join("local_v.json");
    let out = bellcomm(&[
        "vertices", "--M", "2", "--K", "2", "--r", "0",
        "--picture", "probability", "--out", v_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = bellcomm(&["facets", "--in", v_path.to_str().unwrap(), "--out", h_path.to_str().unwrap()]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["facets"], 24);
    assert_eq!(report["result"]["summary"]["equations"], 4);
    // the written H-representation feeds back into extreme
    let out = bellcomm(&["extreme", "--in", h_path.to_str().unwrap()]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["summary"]["points"], 16);
    // and classifies as positivity + sign patterns within the hull
    let out = bellcomm(&["classify", "--facets", h_path.to_str().unwrap(), "--catalog", "local22"]);
    let report = stdout_json(&out);
    assert_eq!(report["result"]["perfect"], true);
}
