mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{counts, total_variation};
use ridgelet_sampler::dataset::{read_nodes, Dataset};
use ridgelet_sampler::{enumerate_exact, ActivationTable, SamplerConfig, Smoothing};

fn ridgelet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ridgelet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ridgelet(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let stdout = ok(&["gen", "--p", "7", "--d", "2", "--m", "100", "--seed", "1", "--out", s(&a)]);
    assert!(stdout.contains("K="));
    ok(&["gen", "--p", "7", "--d", "2", "--m", "100", "--seed", "1", "--out", s(&b)]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("7 2 100\n"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_two() {
    let out = ridgelet(&["gen", "--p", "4", "--d", "1", "--m", "5", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P must be prime"));
    assert_eq!(ridgelet(&["gen", "--p", "7"]).status.code(), Some(2));
    assert_eq!(ridgelet(&["frobnicate"]).status.code(), Some(2));
    let out = ridgelet(&["sample", "--data", "x", "--delta-tv", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ridgelet(&["sample", "--data", "x", "--delta-smooth", "soon"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_methods() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    ok(&["gen", "--p", "5", "--d", "2", "--m", "40", "--seed", "3", "--out", s(&data)]);
    let ds = Dataset::read(fs::read(&data).unwrap().as_slice()).unwrap();

    let text = ok(&["sample", "--data", s(&data), "--method", "uniform", "--n", "3", "--seed", "1"]);
    assert_eq!(read_nodes(text.as_bytes(), &ds.dom).unwrap().len(), 3);
    assert!(text.lines().all(|l| l.ends_with(",1")));

    for method in ["exact", "dequantized"] {
        let text = ok(&["sample", "--data", s(&data), "--method", method, "--n", "10"]);
        assert_eq!(read_nodes(text.as_bytes(), &ds.dom).unwrap().len(), 10);
    }

    let out = ridgelet(&["sample", "--data", s(&data), "--method", "exact", "--cap", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn zero_target_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("z.txt");
    fs::write(&data, "3 2 3\n0 0 0\n1 2 0\n2 2 0\n").unwrap();
    let out = ridgelet(&["sample", "--data", s(&data), "--method", "dequantized"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate target"));
}

#[test]
fn dequantized_tracks_exact_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    ok(&["gen", "--p", "3", "--d", "2", "--m", "30", "--seed", "9", "--out", s(&data)]);
    let ds = Dataset::read(fs::read(&data).unwrap().as_slice()).unwrap();
    let emp = ds.to_empirical().unwrap();
    let g = ActivationTable::relu(3).unwrap();
    let exact = enumerate_exact(&emp, &g, &SamplerConfig::new(1e-3, Smoothing::Auto, 0.1)).unwrap();
    let args = ["--data", s(&data), "--n", "100000", "--delta-tv", "0.1", "--seed", "4"];
    let mut tvs = Vec::new();
    for method in ["exact", "dequantized"] {
        let mut full = vec!["sample", "--method", method];
        full.extend_from_slice(&args);
        let nodes = read_nodes(ok(&full).as_bytes(), &ds.dom).unwrap();
        tvs.push(total_variation(&counts(&ds.dom, &nodes), exact.p_star()));
    }
    assert!(tvs[0] < 0.02, "exact TV {}", tvs[0]);
    assert!(tvs[1] <= 0.1 + 0.02, "dequantized TV {}", tvs[1]);
}

#[test]
fn fit_reports_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    let nodes = dir.path().join("n.txt");
    let model = dir.path().join("m.txt");
    ok(&["gen", "--p", "5", "--d", "1", "--m", "30", "--seed", "2", "--out", s(&data)]);

    fs::write(&nodes, "").unwrap();
    let ds = Dataset::read(fs::read(&data).unwrap().as_slice()).unwrap();
    let emp = ds.to_empirical().unwrap();
    let floor: f64 = emp.probs().iter().zip(emp.labels()).map(|(p, y)| p * y * y).sum();
    let line = ok(&["fit", "--data", s(&data), "--nodes", s(&nodes)]);
    assert!(line.starts_with("N=0 N_eff=0 risk="));
    let risk: f64 = line.trim().rsplit('=').next().unwrap().parse().unwrap();
    assert!((risk - floor).abs() < 1e-12);

    fs::write(&nodes, "2,1,1\n2,1,0\n2,1,1\n").unwrap();
    let line = ok(&["fit", "--data", s(&data), "--nodes", s(&nodes), "--out", s(&model)]);
    assert!(line.starts_with("N=3 N_eff=1 "));
    assert_eq!(fs::read_to_string(&model).unwrap().lines().count(), 2);

    // A D = 2 node list against a D = 1 dataset.
    fs::write(&nodes, "1,2,3,1\n").unwrap();
    assert_eq!(ridgelet(&["fit", "--data", s(&data), "--nodes", s(&nodes)]).status.code(), Some(1));
    // Residue out of range for P = 5.
    fs::write(&nodes, "7,1,1\n").unwrap();
    assert_eq!(ridgelet(&["fit", "--data", s(&data), "--nodes", s(&nodes)]).status.code(), Some(1));
}

#[test]
fn exact_nodes_reduce_risk_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    ok(&["gen", "--p", "7", "--d", "2", "--m", "100", "--seed", "6", "--out", s(&data)]);
    let mut risks = Vec::new();
    for n in ["4", "32", "1024"] {
        let nodes = dir.path().join(format!("n{n}.txt"));
        ok(&["sample", "--data", s(&data), "--method", "exact", "--n", n, "--seed", "1", "--out", s(&nodes)]);
        let line = ok(&["fit", "--data", s(&data), "--nodes", s(&nodes)]);
        risks.push(line.trim().rsplit('=').next().unwrap().parse::<f64>().unwrap());
    }
    assert!(risks[0] > risks[1] && risks[1] > risks[2], "{risks:?}");
    assert!(risks[2] < 0.01, "{risks:?}");
}

#[test]
fn experiments_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let risk = dir.path().join("risk.csv");
    let runtime = dir.path().join("runtime.csv");
    ok(&["risk-experiment", "--d-max", "1", "--reps", "2", "--n-max", "32", "--out", s(&risk)]);
    let text = fs::read_to_string(&risk).unwrap();
    assert_eq!(text.lines().next(), Some("method,delta_tv,P,D,M,N,rep,N_eff,risk,seed"));
    // 4 methods x 3 N x 2 reps.
    assert_eq!(text.lines().count(), 1 + 24);

    let stdout = ok(&[
        "runtime-experiment", "--naive-d-max", "3", "--deq-d-max", "4", "--reps", "2",
        "--naive-fit-min-d", "1", "--deq-fit-min-d", "1", "--out", s(&runtime),
    ]);
    let text = fs::read_to_string(&runtime).unwrap();
    assert_eq!(text.lines().next(), Some("method,P,D,M,rep,wall_seconds,timeout,seed"));
    assert!(text.contains("\nnaive,") && text.contains("\ndequantized,"));
    assert!(stdout.contains("naive exponent=") && stdout.contains("dequantized exponent="));
}
