//! Drives the `dqgnn` binary and checks exit codes and output files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dqgnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqgnn")).args(args).output().expect("binary runs")
}

/// Small two-class set: triangles (label 2) against 5-node paths (label 7).
fn write_dataset(dir: &Path) {
    let (mut a, mut ind, mut gl, mut nl) = (String::new(), String::new(), String::new(), String::new());
    let mut base = 1;
    for g in 0..8 {
        let triangle = g % 2 == 0;
        let n = if triangle { 3 } else { 5 };
        let edges: Vec<(usize, usize)> = if triangle { vec![(0, 1), (1, 2), (0, 2)] } else { (0..4).map(|v| (v, v + 1)).collect() };
        for (u, v) in edges {
            a.push_str(&format!("{}, {}\n{}, {}\n", base + u, base + v, base + v, base + u));
        }
        for v in 0..n {
            ind.push_str(&format!("{}\n", g + 1));
            nl.push_str(&format!("{}\n", (g + v) % 2));
        }
        gl.push_str(if triangle { "2\n" } else { "7\n" });
        base += n;
    }
    for (suffix, body) in [("A", a), ("graph_indicator", ind), ("graph_labels", gl), ("node_labels", nl)] {
        fs::write(dir.join(format!("SMALL_{suffix}.txt")), body).unwrap();
    }
}

const FAST: [&str; 6] = ["--mapping-budget", "30", "--model-budget", "40", "--layers", "1"];

#[test]
fn crossvalidate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let out = dir.path().join("r.json");
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["crossvalidate", "--dataset-dir", d, "--dataset", "SMALL", "--folds", "4", "--seed", "9", "--workers", "1", "--out", out.to_str().unwrap()];
    args.extend(FAST);
    let o = dqgnn(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("fold ")).count(), 4);
    assert!(stdout.contains("mean accuracy"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["per_fold_accuracy"].as_array().unwrap().len(), 4);
    assert_eq!(report["parameter_count"], 6 + 2 + 2);
    assert_eq!(report["published_parameter_count"], 43);
    assert!(report.get("wall_time_seconds").is_none());
    assert_eq!(report["config"]["entanglement"], "full");
}

#[test]
fn record_timing_adds_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let out = dir.path().join("r.json");
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["crossvalidate", "--dataset-dir", d, "--dataset", "SMALL", "--folds", "2", "--record-timing", "--out", out.to_str().unwrap()];
    args.extend(FAST);
    assert_eq!(dqgnn(&args).status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn train_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let d = dir.path().to_str().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let mut args = vec!["train", "--dataset-dir", d, "--dataset", "SMALL", "--entanglement", "ring", "--out", ckpt.to_str().unwrap()];
    args.extend(FAST);
    let o = dqgnn(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("parameter_count 10"));
    assert!(fs::read_to_string(&ckpt).unwrap().contains("entanglement ring"));

    let eval = dir.path().join("e.json");
    let run_eval = || dqgnn(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--dataset-dir", d, "--dataset", "SMALL", "--out", eval.to_str().unwrap()]);
    assert_eq!(run_eval().status.code(), Some(0));
    let first = fs::read(&eval).unwrap();
    assert_eq!(run_eval().status.code(), Some(0));
    assert_eq!(fs::read(&eval).unwrap(), first);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["crossvalidate", "--folds", "1"],
        vec!["crossvalidate", "--entanglement", "mesh"],
        vec!["crossvalidate", "--capacity", "0"],
        vec!["train", "--layers", "0"],
        vec!["frobnicate"],
        vec!["eval"],
    ] {
        let o = dqgnn(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(dqgnn(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = dqgnn(&["train", "--dataset-dir", d, "--dataset", "NOPE"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOPE_A.txt"));

    write_dataset(dir.path());
    fs::write(dir.path().join("bad.ckpt"), "layers 1\nlayer 0 0 0 0 0 0\ncentroids 0 1\nmapping 7 1 1 1 1 1 1 1\ncapacity 8\nentanglement full\nseed 0\n").unwrap();
    let o = dqgnn(&["eval", "--checkpoint", dir.path().join("bad.ckpt").to_str().unwrap(), "--dataset-dir", d, "--dataset", "SMALL", "--out", dir.path().join("e.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expects 7 features"));

    fs::write(dir.path().join("junk.ckpt"), "hello\n").unwrap();
    let o = dqgnn(&["eval", "--checkpoint", dir.path().join("junk.ckpt").to_str().unwrap(), "--dataset-dir", d, "--dataset", "SMALL"]);
    assert_eq!(o.status.code(), Some(2));
}
