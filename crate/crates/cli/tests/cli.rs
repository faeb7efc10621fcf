use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn molmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molmatch")).args(args).output().expect("binary runs")
}

fn stdout_json_lines(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn match_relabeled_molecule_costs_zero() {
    let lines = stdout_json_lines(&molmatch(&["match", "CN=C=O", "O=C=NC"]));
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["cost"], 0.0);
    assert_eq!(lines[0]["permutation"], serde_json::json!([3, 2, 1, 0]));
    assert!(lines[0]["nodes_expanded"].as_u64().unwrap() > 0);
}

#[test]
fn match_top_k_and_stats() {
    let lines = stdout_json_lines(&molmatch(&["match", "CCO", "CCN", "--k", "4", "--stats"]));
    assert_eq!(lines.len(), 5);
    let costs: Vec<f64> = lines[..4].iter().map(|l| l["cost"].as_f64().unwrap()).collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(lines[4]["n_atoms"], 3);
}

#[test]
fn match_accepts_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let parsed = stdout_json_lines(&molmatch(&["parse", "CC=O"]));
    let path = dir.path().join("m.json");
    fs::write(&path, parsed[0]["rows"].to_string()).unwrap();
    let lines = stdout_json_lines(&molmatch(&["match", path.to_str().unwrap(), "O=CC"]));
    assert_eq!(lines[0]["cost"], 0.0);
}

#[test]
fn loss_kinds() {
    let matched = stdout_json_lines(&molmatch(&["loss", "CCO", "OCC", "--grad"]));
    assert_eq!(matched[0]["value"], 0.0);
    assert_eq!(matched[0]["gradient_norm"], 0.0);
    let none = stdout_json_lines(&molmatch(&["loss", "CCO", "OCC", "--kind", "none"]));
    assert!(none[0]["value"].as_f64().unwrap() > 0.0);
    let stats = stdout_json_lines(&molmatch(&["loss", "CCO", "OCC", "--kind", "stats"]));
    assert_eq!(stats[0]["value"], 0.0);
    let embed = stdout_json_lines(&molmatch(&["loss", "CCO", "CCN", "--kind", "embed", "--seed", "3"]));
    assert!(embed[0]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn parse_errors_report_position() {
    let out = molmatch(&["parse", "C("]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unclosed branch at position 1"));
}

#[test]
fn canon_agrees_across_spellings() {
    let lines = stdout_json_lines(&molmatch(&["canon", "CCO", "OCC"]));
    assert_eq!(lines[0]["canonical_form"], lines[1]["canonical_form"]);
    assert_eq!(lines[0]["smiles"], lines[1]["smiles"]);
}

#[test]
fn eval_prints_rounded_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.smi");
    let reference = dir.path().join("ref.smi");
    fs::write(&samples, "CCO\nOCC\nF=F\nCCN\n").unwrap();
    fs::write(&reference, "# known\nCCO\n").unwrap();
    let out = molmatch(&["eval", "--samples", samples.to_str().unwrap(), "--reference", reference.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["validity"], 0.75);
    assert_eq!(v["uniqueness"], 0.6667);
    assert_eq!(v["novelty"], 0.5);
    assert_eq!(v["overall"], 0.25);
}

#[test]
fn fit_writes_curves_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let targets = dir.path().join("targets.smi");
    fs::write(&targets, "CC=O\nC1CN1\n").unwrap();
    let out = dir.path().join("curves.csv");
    let args = [
        "fit",
        "--targets",
        targets.to_str().unwrap(),
        "--strategies",
        "optimal,top10,none",
        "--steps",
        "10",
        "--out",
        out.to_str().unwrap(),
    ];
    let lines = stdout_json_lines(&molmatch(&args));
    assert_eq!(lines.len(), 3);
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "target_id,strategy,step,train_loss,eval_loss");
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 11);
    assert!(dir.path().join("curves.summary.csv").exists());
    let again = dir.path().join("again.csv");
    let mut args2 = args;
    args2[8] = again.to_str().unwrap();
    stdout_json_lines(&molmatch(&args2));
    assert_eq!(csv, fs::read_to_string(&again).unwrap());
}

#[test]
fn fit_rejects_unknown_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let targets = dir.path().join("t.smi");
    fs::write(&targets, "CC\n").unwrap();
    let out = molmatch(&["fit", "--targets", targets.to_str().unwrap(), "--strategies", "best"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown strategy"));
}

#[test]
fn random_molecules_parse_back() {
    let out = molmatch(&["random", "--count", "5", "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    for line in text.lines() {
        assert!(molmatch(&["parse", line]).status.success(), "{line}");
    }
}
