use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrineq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const STEP: &str = r#"{"space":{"type":"chain","N":2,"mu":["1/2","1/2"]},
  "functions":[["0","1"],["0","1"]],
  "series":[["0","1/2"],["0","1/3"]]}"#;

const LATTICE: &str = r#"{"space":{"type":"lattice","ground_size":2,"mu":["1/4","1/4","1/4","1/4"]},
  "functions":[["0","1","0","1"],["0","0","1","1"],["0","1","1","1"]]}"#;

#[test]
fn partitions_csv_lists_shapes() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("p.csv");
    let out = run(&["partitions", "--n", "4", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, fs::read_to_string(&csv).unwrap());
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "shape,length,set_partitions,c_lambda");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "(4),1,1,6");
    assert_eq!(lines[5], "\"(1,1,1,1)\",4,1,-1");
    let total: u64 = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').nth(1).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 15);
}

#[test]
fn eval_step_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "step.json", STEP);
    let json = dir.path().join("out.json");
    let out = run(&["eval", &inst, "--out", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains("E_2 = 1/4"));
    let v = read_json(&json);
    assert_eq!(v["e_n"], "1/4");
    assert_eq!(v["e_delta"]["{1,2}"], "1/2");
}

#[test]
fn eval_lattice_reports_fkg() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "lat.json", LATTICE);
    let json = dir.path().join("out.json");
    let out = run(&["eval", &inst, "--out", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&json);
    assert_eq!(v["fkg"]["holds"], true);
    assert_eq!(v["e_n"], "0");
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad_mu = write(
        &dir,
        "bad.json",
        r#"{"space":{"type":"chain","N":2,"mu":["1/2","1/3"]},"functions":[["0","1"]]}"#,
    );
    assert_eq!(code(&run(&["eval", &bad_mu])), 2);
    let decreasing = write(
        &dir,
        "dec.json",
        r#"{"space":{"type":"chain","N":2,"mu":["1/2","1/2"]},"functions":[["1","0"]]}"#,
    );
    assert_eq!(code(&run(&["eval", &decreasing])), 2);
    let garbage = write(&dir, "g.json", "{not json");
    assert_eq!(code(&run(&["eval", &garbage])), 2);
    assert_eq!(code(&run(&["eval", "/definitely/missing.json"])), 2);
    assert_eq!(code(&run(&["coeffs", "--N", "2", "--mu", "1/2,1/4,1/4", "--n", "2"])), 2);
    assert_eq!(code(&run(&["verify-lemma", "--n-min", "4", "--n-max", "2"])), 2);
}

#[test]
fn coeffs_modes_agree() {
    let dir = TempDir::new().unwrap();
    for (mode, extra) in [("F-check", "1,2,3"), ("B-check", "1/6,1/3,1/2"), ("e200", "1/6,1/3,1/2")] {
        let json = dir.path().join(format!("{mode}.json"));
        let out = run(&["coeffs", "--mu", extra, "--n", "3", "--mode", mode, "--out", json.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{mode}");
        let v = read_json(&json);
        assert_eq!(v["mode"], mode);
        assert_eq!(v["N"], 3);
        assert_eq!(v["all_match"], true);
        let entries = v["entries"].as_object().unwrap();
        assert!(!entries.is_empty());
        assert!(entries.values().all(|e| e["match"] == true));
    }
}

#[test]
fn coeffs_base_case_certificate() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("b.json");
    let out = run(&["coeffs", "--mu", "1/3,2/3", "--n", "1", "--mode", "B-check", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&json);
    let cert = &v["base_case"][0];
    assert_eq!(cert["claimed"], "1/3");
    assert_eq!(cert["oracle"], "1");
    assert_eq!(cert["claim_matches_oracle"], false);
}

#[test]
fn series_routes_agree_on_chain() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "step.json", STEP);
    let json = dir.path().join("s.json");
    let out = run(&["series", &inst, "--T", "4", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&json);
    assert_eq!(v["routes_agree"], true);
    assert_eq!(v["direct"], v["en"]);
    assert_eq!(v["direct"][1], "1/4");
    assert_eq!(v["nonnegativity"]["nonnegative"], true);
}

#[test]
fn search_fkg_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["search-fkg", "--seed", "17", "--count", "300", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = read_json(&a);
    assert_eq!(v["instances_run"], 300);
    assert_eq!(v["violation_found"], false);
    assert_eq!(v["config"]["master_seed"], 17);
}

#[test]
fn verify_lemma_and_corollary_batches() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("v.json");
    let csv = dir.path().join("v.csv");
    let out = run(&[
        "verify-lemma", "--seed", "2", "--count", "200", "--out", json.to_str().unwrap(), "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_json(&json)["violations"], 0);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("n,instances"));

    let json = dir.path().join("c.json");
    let out = run(&["corollary", "--count", "20", "--lattice-count", "5", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&json);
    assert_eq!(v["chain"]["route_mismatches"], 0);
    assert_eq!(v["chain"]["negative_instances"], 0);
}

#[test]
fn config_file_is_honoured() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("v.json");
    let out = run(&["verify-lemma", "--count", "50", "--n-min", "3", "--n-max", "3", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let cfg = read_json(&json)["config"].clone();
    let cfg_path = write(&dir, "cfg.json", &cfg.to_string());
    let json2 = dir.path().join("v2.json");
    let out = run(&["verify-lemma", "--config", &cfg_path, "--count", "50", "--out", json2.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&json).unwrap(), fs::read(&json2).unwrap());
}
