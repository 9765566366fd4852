//! End-to-end tests of the `vie-parareal` binary: exit codes, output
//! formats, artifact files and determinism of emitted CSV.

use std::path::Path;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vie-parareal"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn solve_poly_manufactured_is_exact_and_exits_zero() {
    let out = run(&[
        "solve",
        "--problem",
        "poly-manufactured",
        "--T",
        "1",
        "--N",
        "4",
        "--M",
        "4",
        "--Mc",
        "2",
        "--iters",
        "3",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let error_line = text
        .lines()
        .find(|l| l.starts_with("final linf error:"))
        .expect("final error line");
    let value: f64 = error_line
        .rsplit(' ')
        .next()
        .unwrap()
        .parse()
        .expect("parse error value");
    assert!(value <= 1e-10, "final error {value:e}");
}

#[test]
fn solve_sequential_modes_report_errors() {
    for mode in ["sequential-fine", "sequential-coarse"] {
        let out = run(&[
            "solve",
            "--problem",
            "exp-kernel",
            "--T",
            "10",
            "--N",
            "5",
            "--M",
            "12",
            "--Mc",
            "6",
            "--mode",
            mode,
        ]);
        assert!(out.status.success(), "{mode} stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("final linf error:"));
    }
}

#[test]
fn speedup_prints_the_asymptotic_bound() {
    let out = run(&["speedup", "--N", "20", "--M", "25", "--Mc", "5", "--K", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("14.3678"), "stdout: {text}");
    assert!(text.contains("312500"));
}

#[test]
fn unknown_flag_exits_two() {
    let out = run(&["solve", "--wat", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn unknown_problem_exits_two() {
    let out = run(&[
        "solve",
        "--problem",
        "mystery-kernel",
        "--T",
        "1",
        "--N",
        "2",
        "--M",
        "4",
        "--Mc",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn invalid_degree_order_exits_two() {
    let out = run(&[
        "experiment",
        "error-vs-k",
        "--problem",
        "sin-kernel",
        "--T",
        "4",
        "--N",
        "2",
        "--M",
        "5",
        "--Mc",
        "7",
        "--iters",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn missing_coarse_degree_for_parareal_exits_two() {
    let out = run(&[
        "solve",
        "--problem",
        "sin-kernel",
        "--T",
        "4",
        "--N",
        "2",
        "--M",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("vie-parareal"));
}

#[test]
fn experiment_writes_csv_and_svg_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let svg_path = dir.path().join("out.svg");
    let out = run(&[
        "experiment",
        "error-vs-k",
        "--problem",
        "poly-manufactured",
        "--T",
        "1",
        "--N",
        "4",
        "--M",
        "5",
        "--Mc",
        "2,3",
        "--iters",
        "3",
        "--out",
        csv_path.to_str().unwrap(),
        "--plot",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let records = vie_cli::parse_csv(&csv).unwrap();
    assert_eq!(records.len(), 6);
    assert!(csv.starts_with(vie_cli::CSV_HEADER));

    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

fn read_csv_without_wall(path: &Path) -> Vec<vie_cli::ErrorRecord> {
    let mut records = vie_cli::parse_csv(&std::fs::read_to_string(path).unwrap()).unwrap();
    for r in &mut records {
        r.wall_ms = 0.0;
    }
    records
}

#[test]
fn experiment_csv_is_deterministic_modulo_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "experiment",
            "error-vs-M",
            "--problem",
            "sin-kernel",
            "--T",
            "10",
            "--N",
            "5",
            "--M",
            "8:12:2",
            "--Mc",
            "4",
            "--iters",
            "6",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    assert_eq!(read_csv_without_wall(&a), read_csv_without_wall(&b));
}

#[test]
fn thread_cap_env_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = binary()
        .env("VIE_PARAREAL_THREADS", "2")
        .args([
            "experiment",
            "error-vs-k",
            "--problem",
            "poly-manufactured",
            "--T",
            "1",
            "--N",
            "4",
            "--M",
            "5",
            "--Mc",
            "2",
            "--iters",
            "2",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let bad = binary()
        .env("VIE_PARAREAL_THREADS", "many")
        .args(["solve", "--problem", "poly-manufactured", "--T", "1", "--N", "2", "--M", "4", "--Mc", "2"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_range_syntax_expands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "experiment",
        "error-vs-M",
        "--problem",
        "poly-manufactured",
        "--T",
        "1",
        "--N",
        "2",
        "--M",
        "3:6:1",
        "--Mc",
        "2",
        "--iters",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let records = read_csv_without_wall(&path);
    let degrees: Vec<usize> = records.iter().map(|r| r.fine_degree).collect();
    assert_eq!(degrees, vec![3, 4, 5, 6]);
}
