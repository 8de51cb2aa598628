use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trussforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/layouts").join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn search(dir: &Path, budget: &str, seed: &str) -> Output {
    run(&["search", "--case", "ten-bar-load1", "--budget", budget, "--seed", seed, "--out", dir.to_str().unwrap()])
}

#[test]
fn search_writes_checkpoint_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = search(dir.path(), "1000", "7");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("1000 iterations"));
    let cp = json(&dir.path().join("search.json"));
    assert_eq!(cp["search_iterations"], 1000);
    assert_eq!(cp["seed"], 7);
    let manifest = json(&dir.path().join("search-manifest.json"));
    assert_eq!(manifest["command"], "search");
    assert_eq!(manifest["flags"]["jobs"], 1);
}

#[test]
fn identical_searches_write_identical_checkpoints() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&search(a.path(), "600", "3")), 0);
    assert_eq!(code(&search(b.path(), "600", "3")), 0);
    let read = |d: &Path| std::fs::read(d.join("search.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&search(dir.path(), "0", "1")), 2);
    assert_eq!(code(&run(&["search", "--case", "no-such-case", "--budget", "5"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn missing_files_exit_three() {
    assert_eq!(code(&run(&["refine", "--checkpoint", "/nonexistent/search.json"])), 3);
    assert_eq!(code(&run(&["validate", "/nonexistent/layout.json", "--case", "sundial"])), 3);
}

#[test]
fn refine_with_no_steps_keeps_the_set() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&search(dir.path(), "1500", "5")), 0);
    let cp = dir.path().join("search.json");
    let out = run(&["refine", "--checkpoint", cp.to_str().unwrap(), "--rl-steps", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&dir.path().join("refined.json"))["diverse"], json(&cp)["diverse"]);
    assert!(stdout(&out).lines().last().unwrap().starts_with("best layout:"));
}

#[test]
fn refine_records_ablation_flags_and_log() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&search(dir.path(), "1500", "5")), 0);
    let cp = dir.path().join("search.json");
    let out = run(&[
        "refine",
        "--checkpoint",
        cp.to_str().unwrap(),
        "--rl-steps",
        "60",
        "--no-diverse",
        "--max-invalid",
        "0",
        "--episode-len",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = json(&dir.path().join("refine-manifest.json"));
    assert_eq!(manifest["flags"]["no_diverse"], true);
    assert_eq!(manifest["flags"]["max_invalid"], 0);
    assert_eq!(manifest["rl_steps_done"], 60);
    let log = std::fs::read_to_string(dir.path().join("training-log.jsonl")).unwrap();
    assert!(!log.is_empty());
    for line in log.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        assert!(r["episode_steps"].as_u64().unwrap() <= 10);
        assert!(r["best_mass"].as_f64().unwrap() <= json(&cp)["diverse"]["global"][0]["mass"].as_f64().unwrap());
    }
    let refined = json(&dir.path().join("refined.json"));
    assert!(refined["agent"]["policy"].is_array());
    assert_eq!(refined["replay"]["len"], 60);
}

#[test]
fn refining_an_empty_set_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&search(dir.path(), "5", "1")), 0);
    let path = dir.path().join("search.json");
    let mut cp = json(&path);
    cp["diverse"] = serde_json::json!({"topologies": [], "global": []});
    std::fs::write(&path, cp.to_string()).unwrap();
    let out = run(&["refine", "--checkpoint", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nothing to refine"));
}

#[test]
fn validate_published_layout() {
    let p7 = fixture("sundial-p7.json");
    let out = run(&["validate", p7.to_str().unwrap(), "--case", "sundial", "--max-nodes", "7", "--json"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["classification"], "valid");
    let mass = report["mass"].as_f64().unwrap();
    assert!((mass - 30.6).abs() / 30.6 < 0.05, "{mass}");
    assert_eq!(report["bars"].as_array().unwrap().len(), 13);
}

#[test]
fn validate_names_the_failing_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = json(&fixture("sundial-p7.json"));
    doc["nodes"][3]["pos"][2] = Value::from(doc["nodes"][3]["pos"][2].as_f64().unwrap() + 1.0);
    let moved = dir.path().join("moved.json");
    std::fs::write(&moved, doc.to_string()).unwrap();
    let out = run(&["validate", moved.to_str().unwrap(), "--case", "sundial", "--max-nodes", "7"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("invalid (other)"));
    assert!(text.lines().any(|l| l.trim_start().starts_with("g") && l.contains("FAIL")));

    doc["bars"] = Value::Array(Vec::new());
    let fixed: Vec<Value> = doc["nodes"].as_array().unwrap().iter().filter(|n| n["fixed"] == true).cloned().collect();
    doc["nodes"] = Value::Array(fixed);
    let bare = dir.path().join("bare.json");
    std::fs::write(&bare, doc.to_string()).unwrap();
    let out = run(&["validate", bare.to_str().unwrap(), "--case", "sundial", "--json"]);
    assert_eq!(code(&out), 1);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["classification"], "invalid_structural");
}

#[test]
fn render_labels_the_fixed_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("fragment.svg");
    let layout = fixture("seventeen-bar-fragment.json");
    let out = run(&["render", layout.to_str().unwrap(), "--case", "seventeen-bar", "--out", svg_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let class = |c: &'static str| doc.descendants().filter(move |n| n.attribute("class") == Some(c));
    assert_eq!(class("node").count(), 6);
    let labels: Vec<&str> = class("label").filter_map(|n| n.text()).collect();
    assert_eq!(labels, ["a", "b", "i"]);
    assert_eq!(class("mass").count(), 1);
}

#[test]
fn render_a_checkpoint_and_a_3d_layout() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&search(dir.path(), "1500", "5")), 0);
    let cp = dir.path().join("search.json");
    let svg = dir.path().join("best.svg");
    assert_eq!(code(&run(&["render", cp.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--palette", "mono"])), 0);
    roxmltree::Document::parse(&std::fs::read_to_string(&svg).unwrap()).unwrap();

    let p9 = fixture("sundial-p9.json");
    let out = run(&["render", p9.to_str().unwrap(), "--case", "sundial", "--max-nodes", "9", "--out", svg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("node")).count(), 9);
    assert_eq!(code(&run(&["render", p9.to_str().unwrap(), "--out", svg.to_str().unwrap()])), 2);
}
