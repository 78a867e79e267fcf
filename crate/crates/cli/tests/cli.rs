use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netdea::fixtures::IIMS_2020_21_CSV;
use tempfile::TempDir;

fn netdea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdea"))
        .args(args)
        .env_remove("NETDEA_EPSILON")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn fixture(dir: &TempDir) -> PathBuf {
    write(dir, "iims.csv", IIMS_2020_21_CSV)
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn compare_prints_both_tables_and_rho() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let out = netdea(&["compare", "--data", arg(&data)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Two-stage relational network DEA"));
    assert!(text.contains("Conventional CCR DEA"));
    assert!(text.contains("rho = 0.91758"), "{text}");
    assert!(
        text.lines().any(|l| l.starts_with("D1 ") && l.contains("0.4973(1)")),
        "{text}"
    );
}

#[test]
fn validate_prints_summary() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let out = netdea(&["validate", "--data", arg(&data)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "13 DMUs, 3 inputs, 1 intermediate, 1 output\n");
}

#[test]
fn non_positive_cell_is_a_data_error_with_coordinates() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "bad.csv", "id,name,x1,z1,y1\nA,a,1,2,3\nB,b,-4,5,6\n");
    let out = netdea(&["solve", "--data", arg(&data)]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("line 3, column 3"), "{err}");
    assert!(err.contains("x1"), "{err}");
    assert!(stdout(&out).is_empty());
}

#[test]
fn missing_file_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = netdea(&["validate", "--data", arg(&missing)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_arguments_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    for epsilon in ["0", "1.5", "-1e-6", "abc"] {
        let out = netdea(&["solve", "--data", arg(&data), "--epsilon", epsilon]);
        assert_eq!(out.status.code(), Some(2), "epsilon {epsilon}");
    }
    assert_eq!(
        netdea(&["solve", "--data", arg(&data), "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(netdea(&["solve"]).status.code(), Some(2));
}

#[test]
fn infeasible_epsilon_is_a_solver_error() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let out = netdea(&["solve", "--data", arg(&data), "--epsilon", "0.9"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("epsilon"));
}

#[test]
fn stage_priority_keeps_overall_scores() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let overall = |priority: &str| -> Vec<String> {
        let out = netdea(&[
            "solve",
            "--data",
            arg(&data),
            "--model",
            "relational",
            "--format",
            "csv",
            "--stage-priority",
            priority,
        ]);
        assert_eq!(out.status.code(), Some(0));
        stdout(&out)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().to_string())
            .collect()
    };
    assert_eq!(overall("first"), overall("second"));
}

#[test]
fn output_is_deterministic_and_out_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let report = dir.path().join("report.json");
    let a = netdea(&["compare", "--data", arg(&data), "--format", "json"]);
    let b = netdea(&["compare", "--data", arg(&data), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let c = netdea(&[
        "compare",
        "--data",
        arg(&data),
        "--format",
        "json",
        "--out",
        arg(&report),
    ]);
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&report).unwrap(), a.stdout);
    assert!(stdout(&a).contains("\"spearman_rho\""));
}

#[test]
fn unwritable_output_is_an_output_error() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let target = dir.path().join("missing-dir").join("report.txt");
    let out = netdea(&["compare", "--data", arg(&data), "--out", arg(&target)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn epsilon_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let json = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_netdea"));
        cmd.args(["solve", "--data", arg(&data), "--format", "json"])
            .env_remove("NETDEA_EPSILON");
        if let Some(value) = env {
            cmd.env("NETDEA_EPSILON", value);
        }
        if let Some(value) = flag {
            cmd.args(["--epsilon", value]);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    assert!(json(Some("1e-5"), None).contains("\"epsilon\": 0.00001,"));
    assert!(json(Some("1e-5"), Some("2e-6")).contains("\"epsilon\": 2e-6,"));
    assert_eq!(json(Some("0.5"), Some("1e-6")), json(None, None));
}

#[test]
fn rank_prints_rank_columns() {
    let dir = TempDir::new().unwrap();
    let data = fixture(&dir);
    let out = netdea(&["rank", "--data", arg(&data), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("id,name,rank_overall,rank_stage1,rank_stage2,ccr_rank")
    );
    assert_eq!(lines.next(), Some("D1,IIM Bangalore,1,9,1,1"));
}
