use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn delayhit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delayhit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = delayhit(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write_trace(dir: &TempDir, name: &str, items: &[u32]) -> String {
    let path = dir.path().join(name);
    let text: String = items.iter().map(|i| format!("{i}\n")).collect();
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn ratio(v: &Value) -> f64 {
    v["numerator"].as_f64().unwrap() / v["denominator"].as_f64().unwrap()
}

#[test]
fn triple_burst_costs_six() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, "t", &[3, 3, 3]);
    let report = json_ok(&["simulate", &trace, "-k", "2", "-Z", "3", "--policy", "lru"]);
    assert_eq!(report["results"]["total_latency"], 6);
    assert_eq!(
        report["results"]["per_request_latency"],
        serde_json::json!([3, 2, 1])
    );
}

#[test]
fn resident_item_is_free() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, "t", &[1]);
    let report = json_ok(&["simulate", &trace]);
    assert_eq!(report["results"]["total_latency"], 0);
}

#[test]
fn item_beyond_universe_is_input_error() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, "t", &[1, 7]);
    let out = delayhit(&["simulate", &trace, "-n", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_trace_and_unknown_policy_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad");
    fs::write(&path, "1\nx\n").unwrap();
    assert_eq!(
        delayhit(&["simulate", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let trace = write_trace(&dir, "t", &[1]);
    assert_eq!(
        delayhit(&["simulate", &trace, "--policy", "mru"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        delayhit(&["adversary", "--policy", "belady"]).status.code(),
        Some(2)
    );
}

#[test]
fn adversary_small() {
    let report = json_ok(&[
        "adversary",
        "--policy",
        "lru",
        "-k",
        "2",
        "-Z",
        "3",
        "--oracle-check",
    ]);
    let r = &report["results"];
    assert!(ratio(&r["ratio_lower_bound"]) >= 5.0);
    assert_eq!(r["opt_latency"], 3);
    assert_eq!(r["oracle"]["min_latency"], 3);
}

#[test]
fn adversary_lru_k4_z10() {
    let report = json_ok(&["adversary", "--policy", "lru", "-k", "4", "-Z", "10"]);
    assert!(ratio(&report["results"]["ratio_lower_bound"]) >= 23.0);
}

#[test]
fn adversary_against_never_is_capped() {
    let report = json_ok(&[
        "adversary",
        "--policy",
        "never",
        "-k",
        "3",
        "-Z",
        "3",
        "--cap",
        "5",
    ]);
    assert_eq!(report["results"]["capped"], true);
    assert_eq!(report["results"]["bursty_count"], 5);
}

#[test]
fn counterexample_z6() {
    let report = json_ok(&["counterexample", "-Z", "6", "-k", "1", "--oracle-check"]);
    let v = &report["results"]["verification"];
    assert_eq!(v["gap"], 3);
    assert_eq!(v["predicted_gap"], 3);
    assert_eq!(v["opt_latency"], v["latency_b"]);
}

#[test]
fn counterexample_below_minimum_delay_is_input_error() {
    assert_eq!(
        delayhit(&["counterexample", "-Z", "4"]).status.code(),
        Some(2)
    );
}

#[test]
fn oracle_budget_exhaustion_keeps_partial_report() {
    let out = delayhit(&[
        "counterexample",
        "-Z",
        "8",
        "-k",
        "2",
        "--oracle-check",
        "--budget",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        report["results"]["verification"]["oracle_budget_exceeded"],
        true
    );
    assert_eq!(report["results"]["verification"]["gap"], 8);
}

#[test]
fn latency_check_suite_passes() {
    let report = json_ok(&[
        "check", "--suite", "latency", "--cases", "1000", "--seed", "7",
    ]);
    assert_eq!(report["results"]["passed"], 1000);
    assert_eq!(report["results"]["failed"], 0);
}

#[test]
fn reduce_holds_on_trace() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, "t", &[5, 0, 0, 0, 0, 6, 5, 0, 5, 3, 4, 3, 7, 5]);
    let report = json_ok(&[
        "reduce", &trace, "--policy", "lru", "-k", "1", "-Z", "3", "-n", "8",
    ]);
    assert_eq!(report["results"]["violations"], serde_json::json!([]));
    assert!(
        report["results"]["wrapped_total"].as_u64() <= report["results"]["inner_total"].as_u64()
    );
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let trace = write_trace(&dir, "t", &[4, 2, 0, 4, 5, 1, 5, 3]);
    for args in [
        vec![
            "simulate",
            trace.as_str(),
            "--policy",
            "random",
            "--seed",
            "11",
        ],
        vec![
            "check",
            "--suite",
            "reduction",
            "--cases",
            "100",
            "--seed",
            "3",
        ],
        vec!["adversary", "--policy", "fifo", "-k", "3", "-Z", "5"],
    ] {
        let a = delayhit(&args);
        let b = delayhit(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let res = delayhit(&[
        "check",
        "--suite",
        "antimono",
        "--cases",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert!(res.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["command"], "check");
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn adversarial_traces_round_trip_through_simulate() {
    let dir = TempDir::new().unwrap();
    for (policy, k, z) in [("lru", "2", "3"), ("fifo", "3", "4"), ("lru", "4", "6")] {
        let trace = dir.path().join(format!("{policy}-{k}-{z}"));
        let adv = json_ok(&[
            "adversary",
            "--policy",
            policy,
            "-k",
            k,
            "-Z",
            z,
            "--trace-out",
            path_str(&trace),
        ]);
        let n = adv["params"]["n"].to_string();
        let sim = json_ok(&[
            "simulate",
            path_str(&trace),
            "--policy",
            policy,
            "-k",
            k,
            "-Z",
            z,
            "-n",
            &n,
        ]);
        assert_eq!(
            sim["results"]["total_latency"],
            adv["results"]["policy_latency"]
        );
    }
}

#[test]
fn counterexample_trace_round_trips_through_simulate() {
    let dir = TempDir::new().unwrap();
    for (z, k) in [(5u32, 1u32), (6, 2), (7, 3)] {
        let trace = dir.path().join(format!("ce-{z}-{k}"));
        let (zs, ks) = (z.to_string(), k.to_string());
        let ce = json_ok(&[
            "counterexample",
            "-Z",
            &zs,
            "-k",
            &ks,
            "--trace-out",
            path_str(&trace),
        ]);
        // The optimal schedule keeps 2..k and k+2 once k+2 arrives.
        let targets: Vec<String> = (2..=k).chain([k + 2]).map(|i| i.to_string()).collect();
        let n = (k + 2).to_string();
        let sim = json_ok(&[
            "simulate",
            path_str(&trace),
            "--policy",
            "static",
            "--static-set",
            &targets.join(","),
            "-k",
            &ks,
            "-Z",
            &zs,
            "-n",
            &n,
        ]);
        let v = &ce["results"]["verification"];
        assert_eq!(sim["results"]["total_latency"], v["latency_b"]);
        assert_eq!(sim["results"]["hit_sequence"], ce["results"]["b"]);
    }
}
