use std::path::Path;
use std::process::{Command, Output};

use ibp_core::QuboInstance;
use serde_json::Value;

fn ibp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_instance_and_reports_it() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("mc.qubo");
    let out = ibp(&[
        "gen",
        "--class",
        "maxcut",
        "--n",
        "2000",
        "--p",
        "0.01",
        "--seed",
        "7",
        "-o",
        path(&file),
    ]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let q = QuboInstance::load(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(q.n(), 2000);
    assert_eq!(report["n"], 2000);
    assert_eq!(report["nnz"], q.num_couplings());
    assert_eq!(report["seed"], 7);
    // roughly p * n(n-1)/2 edges
    let expected = 0.01 * 2000.0 * 1999.0 / 2.0;
    assert!((q.num_couplings() as f64 - expected).abs() < 5.0 * expected.sqrt());
}

#[test]
fn gen_is_reproducible() {
    let a = ibp(&[
        "gen", "--class", "random", "--n", "50", "--p", "0.1", "--seed", "3",
    ]);
    let b = ibp(&[
        "gen", "--class", "random", "--n", "50", "--p", "0.1", "--seed", "3",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        ibp(&["gen", "--n", "5", "--p", "1.5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        ibp(&["gen", "--class", "clique", "--n", "5", "--p", "0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ibp(&["solve", "--budget", "10"]).status.code(), Some(1));
    assert_eq!(ibp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ibp(&["--help"]).status.code(), Some(0));
}

#[test]
fn mis_on_clique_verifies_to_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("k5.qubo");
    let out = ibp(&[
        "gen",
        "--class",
        "mis",
        "--n",
        "5",
        "--p",
        "1.0",
        "--seed",
        "1",
        "-o",
        path(&file),
    ]);
    assert!(out.status.success());
    let out = ibp(&["verify", path(&file)]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["min_energy"], -1.0);
    assert_eq!(report["forest"], false);
}

#[test]
fn verify_reports_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pair.qubo");
    std::fs::write(&file, "qubo 2 1\n0 1 -2\n").unwrap();
    let out = ibp(&["verify", path(&file), "--beta", "1"]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let e2 = 2f64.exp();
    let p1 = report["marginals"][0].as_f64().unwrap();
    assert!((p1 - (1.0 + e2) / (3.0 + e2)).abs() < 1e-12);
    assert_eq!(report["tree_dp_min"], -2.0);
}

#[test]
fn zero_budget_gives_initial_row_only() {
    let out = ibp(&[
        "solve", "--class", "mis", "--n", "20", "--p", "0.2", "--budget", "0",
    ]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "spin_updates,best,median,p01");
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn five_cycle_mis_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c5.qubo");
    // fields -1, penalty 2 on the cycle edges
    let mut text = String::from("qubo 5 5\n");
    for i in 0..5 {
        text.push_str(&format!("{i} {i} -1\n"));
    }
    for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)] {
        text.push_str(&format!("{i} {j} 2\n"));
    }
    std::fs::write(&file, text).unwrap();
    let summary = dir.path().join("s.json");
    for algo in ["ibp", "sa"] {
        let out = ibp(&[
            "solve",
            path(&file),
            "--algo",
            algo,
            "--summary",
            path(&summary),
        ]);
        assert!(out.status.success());
        let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
        assert_eq!(s["best_energy"], -2.0, "{algo}");
        let bits = s["best_assignment"].as_str().unwrap();
        assert_eq!(bits.len(), 5);
        assert_eq!(bits.matches('1').count(), 2);
        assert_eq!(s["seed"], 0);
        assert_eq!(s["config"]["replicas"], 64);
        assert!(s["wall_time_s"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let base = [
        "--class", "mis", "--n", "120", "--p", "0.05", "--budget", "3000", "--seed", "9",
    ];
    for cmd in ["solve", "bench"] {
        let runs: Vec<Vec<u8>> = ["1", "2", "8"]
            .iter()
            .map(|t| {
                let mut args = vec![cmd];
                args.extend(base);
                args.extend(["--threads", t]);
                let out = ibp(&args);
                assert!(out.status.success());
                out.stdout
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{cmd}");
        assert_eq!(runs[0], runs[2], "{cmd}");
    }
}

#[test]
fn bench_equalizes_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = ibp(&[
        "bench",
        "--class",
        "mis",
        "--n",
        "200",
        "--p",
        "0.03",
        "--budget",
        "5000",
        "--replicas",
        "16",
        "--csv",
        path(&csv),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("algo,spin_updates,best,median,p01"));
    let mut last = std::collections::HashMap::new();
    let mut prev_best = std::collections::HashMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let updates: u64 = f[1].parse().unwrap();
        let (best, median, p01): (f64, f64, f64) = (
            f[2].parse().unwrap(),
            f[3].parse().unwrap(),
            f[4].parse().unwrap(),
        );
        assert!(p01 >= best && median >= p01);
        let prev = prev_best
            .insert(f[0].to_string(), best)
            .unwrap_or(f64::INFINITY);
        assert!(best <= prev);
        last.insert(f[0].to_string(), updates);
    }
    let (ibp_u, sa_u) = (last["ibp"], last["sa"]);
    assert_eq!(sa_u, 5000);
    // within one IBP step (at most n spin updates)
    assert!((5000..5200).contains(&ibp_u));
    let s: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(s["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_rejects_zero_budget() {
    let out = ibp(&[
        "bench", "--class", "mis", "--n", "10", "--p", "0.2", "--budget", "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn io_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.qubo");
    assert_eq!(ibp(&["solve", path(&missing)]).status.code(), Some(2));
    let bad = dir.path().join("bad.qubo");
    std::fs::write(&bad, "qubo 3 1\n0 2 x\n").unwrap();
    let out = ibp(&["verify", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn verify_refuses_large_loopy_instance() {
    let out = ibp(&["verify", "--class", "maxcut", "--n", "40", "--p", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
}
