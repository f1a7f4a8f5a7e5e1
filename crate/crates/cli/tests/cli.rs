use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chartsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chartsynth")).args(args).output().expect("binary runs")
}

fn stage_reports(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn run_all(root: &Path, extra: &[&str]) -> Vec<Value> {
    let mut args = vec!["-o", root.to_str().unwrap(), "-m", "5", "-n", "4", "--per-type", "3", "--seed", "7"];
    args.extend_from_slice(extra);
    args.push("run-all");
    stage_reports(&chartsynth(&args))
}

#[test]
fn run_all_counts_reconcile_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let reports = run_all(dir.path(), &["-j", "3"]);
    let details: Vec<&Value> = reports.iter().map(|r| &r["details"]).collect();
    let attempted: u64 = details[2]["per_type"].as_object().unwrap().values().map(|r| r["attempted"].as_u64().unwrap()).sum();
    assert_eq!(attempted, 18 * 5 * 4);
    assert_eq!(details[2]["indexed"], details[4]["kept"]);
    assert_eq!(details[3]["batches"], details[4]["kept"]);
    assert_eq!(details[3]["records"].as_u64().unwrap(), 19 * details[3]["batches"].as_u64().unwrap());
    assert_eq!(details[5]["entries"], 54);

    let again = run_all(dir.path(), &["-j", "1"]);
    assert!(again.iter().all(|r| r["skipped"] == true), "worker count is not part of the digest");
    assert_eq!(again[5]["details"]["checksum"], details[5]["checksum"]);

    let persisted: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(persisted["m"], 5);
    assert_eq!(persisted["seed"], 7);
}

#[test]
fn same_seed_gives_same_manifest() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_all(a.path(), &["-j", "1"]);
    let rb = run_all(b.path(), &["-j", "4"]);
    assert_eq!(ra[5]["details"]["checksum"], rb[5]["details"]["checksum"]);
    let ma = fs::read(a.path().join("benchmark/manifest.jsonl")).unwrap();
    let mb = fs::read(b.path().join("benchmark/manifest.jsonl")).unwrap();
    assert_eq!(ma, mb);
}

#[test]
fn evaluate_gold_predictions_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    run_all(dir.path(), &[]);
    let root = dir.path().to_str().unwrap();
    let gold = dir.path().join("gold.jsonl");
    assert!(chartsynth(&["-o", root, "evaluate", "--emit-gold", gold.to_str().unwrap()]).status.success());
    let out = chartsynth(&["-o", root, "evaluate", "--json", "--predictions", gold.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["relaxed_accuracy"], 1.0);
    assert_eq!(report["rnss"], 1.0);
    assert_eq!(report["bleu4"], 1.0);

    let broken = dir.path().join("broken.jsonl");
    fs::write(&broken, "{\"entry_id\": \"line-0000\", \"answer\": \"1\"}\nnot json\n").unwrap();
    let out = chartsynth(&["-o", root, "evaluate", "--predictions", broken.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.in.json");
    fs::write(&config, r#"{"chart_types": ["pie"], "m": 3, "n": 9, "seed": 1}"#).unwrap();
    let root = dir.path().join("out");
    let out = chartsynth(&["--config", config.to_str().unwrap(), "-o", root.to_str().unwrap(), "-n", "2", "gen-styles"]);
    let report = &stage_reports(&out)[0];
    assert_eq!(report["details"]["per_type"]["pie"]["styles"], 2);
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let out = chartsynth(&["-o", root, "-m", "0", "gen-data"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 1"));

    assert!(!chartsynth(&["-o", root, "--types", "sankey", "gen-data"]).status.success());

    // compose before any data exists fails and leaves its marker
    let out = chartsynth(&["-o", root, "--types", "line", "compose"]);
    assert!(!out.status.success());
    assert!(dir.path().join("reports/compose.incomplete").exists());

    let config = dir.path().join("bad.json");
    fs::write(&config, r#"{"m": 3, "colour": "red"}"#).unwrap();
    assert!(!chartsynth(&["--config", config.to_str().unwrap(), "gen-data"]).status.success());
}

#[test]
fn templates_round_trip_through_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let tpl = dir.path().join("templates");
    assert!(chartsynth(&["templates", "dump", tpl.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_dir(&tpl).unwrap().count(), 36);
    let out = chartsynth(&["templates", "validate", tpl.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    fs::remove_file(tpl.join("pie.json")).unwrap();
    let out = chartsynth(&["templates", "validate", tpl.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("pie"));
}
