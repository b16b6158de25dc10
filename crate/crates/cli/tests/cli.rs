use std::fs;
use std::process::{Command, Output};

fn bbdg(out: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbdg"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("run bbdg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ops_writes_one_row_per_degree() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbdg(dir.path(), &["ops", "--n", "1..4", "--basis", "bernstein"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("3.181818"));
    let csv = fs::read_to_string(dir.path().join("ops/bernstein_l0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(!dir.path().join("ops/nodal_lift.csv").exists());
}

#[test]
fn ops_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(bbdg(d.path(), &["ops", "--n", "2,5"]).status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("ops/operators.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn empty_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbdg(dir.path(), &["ops", "--n", "5..3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty degree range"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        bbdg(dir.path(), &["check", "--suite", "nope"]).status.code(),
        Some(2)
    );
}

#[test]
fn check_passes_and_perturbation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bbdg(dir.path(), &["check", "--suite", "derivative", "--n", "1..3"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("PASS"));
    let bad = bbdg(
        dir.path(),
        &[
            "check",
            "--suite",
            "derivative",
            "--n",
            "2",
            "--perturb-d0",
            "1e-6",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(csv.contains(",false"));
}

#[test]
fn solve_writes_series_summary_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbdg(
        dir.path(),
        &[
            "solve",
            "--n",
            "2",
            "--mesh",
            "1",
            "--tmax",
            "0.1",
            "--every",
            "1",
            "--checkpoint",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let base = dir.path().join("solve/bernstein_N2_n1_double");
    let csv = fs::read_to_string(base.with_extension("csv")).unwrap();
    assert!(csv.starts_with("step,tau,l2_error_p,energy\n"));
    assert!(csv.lines().count() > 2);
    let summary = fs::read_to_string(base.with_extension("summary.txt")).unwrap();
    assert!(summary.contains("lift optimal"));
    assert!(base.with_extension("checkpoint").exists());
}

#[test]
fn nodal_with_bernstein_lift_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbdg(
        dir.path(),
        &["solve", "--basis", "nodal", "--lift", "optimal", "--mesh", "1"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convergence_needs_two_meshes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        bbdg(dir.path(), &["convergence", "--meshes", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn convergence_rates_match_across_bases() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbdg(
        dir.path(),
        &[
            "convergence",
            "--n",
            "1",
            "--meshes",
            "1,2",
            "--tmax",
            "0.1",
            "--basis",
            "both",
        ],
    );
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("convergence/N1_double.csv")).unwrap();
    let orders: Vec<f64> = csv
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next().and_then(|v| v.parse().ok()))
        .collect();
    assert_eq!(orders.len(), 2);
    assert!((orders[0] - orders[1]).abs() < 5e-3);
}

#[test]
fn mesh_and_nodes_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbdg(dir.path(), &["mesh", "--mesh", "2"]);
    assert!(stdout(&o).contains("elements 48"));
    assert!(dir.path().join("mesh/cube_n2.txt").exists());
    let o = bbdg(dir.path(), &["nodes", "--n", "3", "--kind", "equispaced"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("nodes/equispaced_N3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("blocker");
    fs::write(&file, "x").unwrap();
    let o = bbdg(&file, &["complexity"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot create output directory"));
}
