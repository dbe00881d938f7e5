use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], data_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paretoir"))
        .args(args)
        .env("PARETOIR_DATA_DIR", data_dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], data_dir: &Path) -> String {
    let out = run(args, data_dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn usage_errors_exit_two_and_domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["retrieve", "--bogus"], dir.path()).status.code(), Some(2));
    let missing = run(&["build-model", "--dataset", "/no/such/file.bin"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
}

#[test]
fn dataset_model_and_retrieval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let csv = d.join("bench.csv");
    let bin = d.join("bench.bin");
    ok(&["synth", "--out", csv.to_str().unwrap(), "--seed", "2"], d);
    let ingested: Value = serde_json::from_str(&ok(
        &["ingest", "--input", csv.to_str().unwrap(), "--output", bin.to_str().unwrap(), "--normalize", "minmax"],
        d,
    ))
    .unwrap();
    assert_eq!(ingested["labels"], 3);

    let (m1, m2) = (d.join("m1.emr"), d.join("m2.emr"));
    for m in [&m1, &m2] {
        ok(
            &["build-model", "--dataset", bin.to_str().unwrap(), "--anchors", "64", "--seed", "7", "--out", m.to_str().unwrap()],
            d,
        );
    }
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());

    let resp: Value = serde_json::from_str(&ok(
        &[
            "retrieve", "--model", m1.to_str().unwrap(), "--dataset", bin.to_str().unwrap(),
            "--queries", "3,17", "--k", "20", "--method", "pfm",
        ],
        d,
    ))
    .unwrap();
    let items: usize = resp["fronts"].as_array().unwrap().iter().map(|f| f.as_array().unwrap().len()).sum();
    assert!(items <= 20 && items > 0);
    assert_eq!(resp["method"], "pfm");

    // Without --out the model lands in the registry and is addressed by id.
    let built: Value = serde_json::from_str(&ok(&["build-model", "--dataset", bin.to_str().unwrap(), "--seed", "7"], d)).unwrap();
    let id = built["model_id"].as_str().unwrap();
    let fronts: Value = serde_json::from_str(&ok(&["fronts", "--model", id, "--queries", "a0,b0", "--depth", "2"], d)).unwrap();
    assert_eq!(fronts["fronts"].as_array().unwrap().len(), 2);
    let scal: Value = serde_json::from_str(&ok(
        &["retrieve", "--model", id, "--queries", "a0,b0", "--k", "5", "--method", "scalarized:0.3,0.7"],
        d,
    ))
    .unwrap();
    assert_eq!(scal["weights"], serde_json::json!([0.3, 0.7]));
    assert_eq!(run(&["retrieve", "--model", id, "--queries", "a0", "--k", "0"], d).status.code(), Some(1));
}

#[test]
fn evaluate_prints_one_column_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = ok(
        &[
            "evaluate", "--pairs", "100", "--models", "5", "--methods", "pfm,mq_avg,mq_max",
            "--json", json.to_str().unwrap(),
        ],
        dir.path(),
    );
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,pfm,mq_avg,mq_max"));
    assert_eq!(lines.count(), 20);
    let report: Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(report["meta"]["model_seeds"], serde_json::json!([0, 1, 2, 3, 4]));
    assert_eq!(report["meta"]["pairs"], 100);
}

#[test]
fn asymptotics_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let table = ok(&["asymptotics", "continuum", "--dim", "1", "--density", "exp:2", "--n", "100,1000", "--runs", "2"], dir.path());
    assert!(table.starts_with("n,seed,runs,"));
    assert_eq!(table.lines().count(), 3);

    let plot = dir.path().join("levels.dat");
    let probe: Value = serde_json::from_str(&ok(
        &[
            "asymptotics", "probe", "--n", "5000", "--levels", "0.5,3", "--format", "json",
            "--gnuplot", plot.to_str().unwrap(),
        ],
        dir.path(),
    ))
    .unwrap();
    let levels = probe["report"]["levels"].as_array().unwrap();
    assert!(levels[0]["defect"].is_number());
    assert!(levels[1]["defect"].is_null() && levels[1]["note"].is_string());
    assert!(std::fs::read_to_string(plot).unwrap().contains("# level"));
    assert_eq!(run(&["asymptotics", "probe", "--dim", "3", "--n", "100"], dir.path()).status.code(), Some(1));
}
