//! End-to-end tests of the `ehsim` binary: exit codes, output files,
//! determinism of emitted artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn ehsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("EHSIM_OUT")
        .output()
        .expect("spawn ehsim")
}

#[test]
fn run_writes_summary_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehsim(
        &[
            "run", "--scenario", "fig2", "--algo", "lem", "--v", "30", "--horizon", "5000",
            "--seed", "1", "--out", "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("o/run_summary.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(doc["metrics"]["outage_count"], 0);
    assert_eq!(doc["metrics"]["algorithm"], "lem");
    assert_eq!(doc["overrides"]["v"], 30.0);
}

#[test]
fn invalid_v_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehsim(&["run", "--v", "0.5", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("V = 0.5"));
}

#[test]
fn missing_scenario_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehsim(&["run", "--scenario", "no_such_file.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // probability out of range
    let doc = serde_json::json!({
        "topology": {"node_count": 2, "commodities": [1]},
        "links": [{"from": 0, "to": 1, "p_good": 1.5}],
        "harvest": [{"node": 0, "size": 2.0, "p": 0.5}],
        "utilities": [{"node": 0, "weight": 1.0}],
        "parameters": {"v": 30.0, "c": 0.6667, "horizon": 1000, "seed": 1}
    });
    let path = dir.path().join("bad.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = ehsim(&["validate", "--scenario", "bad.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    let doc = serde_json::json!({
        "topology": {"node_count": 3, "commodities": [2]},
        "links": [
            {"from": 0, "to": 1, "p_good": 0.6},
            {"from": 1, "to": 2, "p_good": 0.8}
        ],
        "harvest": [
            {"node": 0, "size": 2.0, "p": 0.5},
            {"node": 1, "size": 2.0, "p": 0.5}
        ],
        "utilities": [{"node": 0, "weight": 2.0}],
        "parameters": {"v": 20.0, "c": 0.6667, "horizon": 3000, "seed": 7},
        "regime_changes": [{"slot": 1500, "p_good": [0.2, 0.8], "p_harvest": [0.8, 0.5]}]
    });
    let path = dir.path().join("chain.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = ehsim(
        &["run", "--scenario", "chain.json", "--algo", "esa", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = ehsim(&["validate", "--scenario", "chain.json", "--out", "o"], dir.path());
    assert!(out.status.success());
}

#[test]
fn traces_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let out = ehsim(
            &[
                "run", "--scenario", "fig2", "--algo", "lem", "--v", "40", "--horizon", "8000",
                "--seed", "5", "--trace", "--out", name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
        bytes.push(std::fs::read(dir.path().join(name).join("trace.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    // the trace carries the expected header
    let head = String::from_utf8_lossy(&bytes[0])
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(head, "slot,q_0_3,q_1_3,q_2_3,e_0,e_1,e_2,admitted,delivered,dropped");
}

#[test]
fn sweep_writes_table_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehsim(
        &[
            "sweep", "--scenario", "fig2", "--v-list", "30,40", "--horizon", "4000", "--out", "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in [
        "sweep_summary.csv",
        "sweep_summary.json",
        "utility_vs_v.csv",
        "queue_vs_v.csv",
        "energy_vs_v.csv",
        "delay_vs_v.csv",
    ] {
        assert!(dir.path().join("o").join(file).exists(), "{file} missing");
    }
    let table = std::fs::read_to_string(dir.path().join("o/sweep_summary.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 4); // header + 2 V x 2 algos
    let series = std::fs::read_to_string(dir.path().join("o/utility_vs_v.csv")).unwrap();
    assert!(series.starts_with("v,utility_lem,utility_esa"));
}

#[test]
fn converge_reports_paired_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehsim(
        &[
            "converge", "--scenario", "fig2-regime", "--v", "80", "--seeds", "2", "--out", "o",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/convergence_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["seeds"], 2);
    assert!(report["headline"]["segment_0"]["lem_steady_mean"].is_number());
    assert!(dir.path().join("o/energy_lem.csv").exists());
    assert!(dir.path().join("o/energy_esa.csv").exists());
}

#[test]
fn oracle_prints_weak_duality_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehsim(
        &["oracle", "--scenario", "tiny1node", "--v", "30", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("weak duality"));
    assert!(stdout.contains("true"));
    assert!(dir.path().join("o/oracle.json").exists());
}
