use std::fs;
use std::process::{Command, Output};

use clap::CommandFactory;
use finsolv::cli::{Cli, MINE_CSV_HEADER, SWEEP_CSV_HEADER};
use tempfile::TempDir;

const TRIANGLE: &str = "0 1\n1 2\n0 2\n";
const SQUARE: &str = "0 1\n1 2\n2 3\n3 0\n";
const BOWTIE: &str = "0 1\n1 2\n0 2\n2 3\n3 4\n2 4\n";

fn finsolv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsolv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn argument_definitions_are_consistent() {
    Cli::command().debug_assert();
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.txt", TRIANGLE);
    let sq = write(&dir, "sq.txt", SQUARE);
    let bad = write(&dir, "bad.txt", "0 1\n1 one\n");
    assert_eq!(finsolv(&["check", &tri]).status.code(), Some(0));
    assert_eq!(finsolv(&["check", &sq]).status.code(), Some(1));
    let o = finsolv(&["check", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(
        finsolv(&["check", "/nonexistent/graph.txt"]).status.code(),
        Some(2)
    );
    assert_eq!(
        finsolv(&["check", &tri, "--tolerance", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(finsolv(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn check_json_report() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.txt", TRIANGLE);
    let o = finsolv(&["check", &tri, "--format", "json", "--exact"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["finite_solvable"], true);
    assert_eq!(v["rank_jp"], 18);
    assert_eq!(v["expected_rank"], 18);
    assert_eq!(v["jacobian_rows"], 48);
    assert_eq!(v["jacobian_cols"], 36);
    assert_eq!(v["seeds"].as_array().unwrap().len(), 5);
    assert_eq!(v["finite_field"]["finite_solvable"], true);
    assert!(v.get("wall_time").is_none());

    let timed = finsolv(&["check", &tri, "--format", "json", "--timings"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&timed)).unwrap();
    assert!(v["wall_time"].as_f64().is_some());
}

#[test]
fn json_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let bow = write(&dir, "bow.txt", BOWTIE);
    for cmd in ["check", "components", "dims"] {
        let a = finsolv(&[cmd, &bow, "--format", "json"]);
        let b = finsolv(&[cmd, &bow, "--format", "json"]);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn components_output() {
    let dir = TempDir::new().unwrap();
    let bow = write(&dir, "bow.txt", BOWTIE);
    let sq = write(&dir, "sq.txt", SQUARE);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&finsolv(&["components", &bow, "--format", "json"]))).unwrap();
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[0]["nodes"], serde_json::json!([0, 1, 2]));
    assert_eq!(comps[1]["nodes"], serde_json::json!([2, 3, 4]));
    let text = stdout(&finsolv(&["components", &sq]));
    assert!(text.starts_with("4 component(s)"), "{text}");
}

#[test]
fn explicit_seeds_and_gauge() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.txt", TRIANGLE);
    let o = finsolv(&[
        "check", &tri, "--seeds", "1,2,3", "--gauge", "1,2", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seeds"], serde_json::json!([1, 2, 3]));
    assert_eq!(v["gauge_edge"], serde_json::json!([1, 2]));
    assert_eq!(
        finsolv(&["check", &tri, "--gauge", "0,5"]).status.code(),
        Some(2)
    );
}

#[test]
fn export_matrix_market() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.txt", TRIANGLE);
    let out = dir.path().join("j.mtx");
    let o = finsolv(&["check", &tri, "--export-matrix", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    let header = text.lines().find(|l| !l.starts_with('%')).unwrap();
    assert!(header.starts_with("48 36 "));
}

#[test]
fn mine_csv_and_witnesses() {
    let dir = TempDir::new().unwrap();
    let wdir = dir.path().join("w");
    let o = finsolv(&[
        "mine",
        "5",
        "6",
        "--format",
        "csv",
        "--witnesses-dir",
        wdir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("{MINE_CSV_HEADER}\n5,6,2,1\n6,8,9,4\n"));
    let files = fs::read_dir(&wdir).unwrap().count();
    assert_eq!(files, 5);
    let text = stdout(&finsolv(&["mine", "6"]));
    assert!(text.contains("9 candidates, 4 finite solvable"), "{text}");
    assert_eq!(finsolv(&["mine", "9"]).status.code(), Some(2));
}

#[test]
fn sweep_csv() {
    let o = finsolv(&[
        "sweep",
        "8",
        "100",
        "3",
        "--format",
        "csv",
        "--seed-count",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
    assert_eq!(lines.next(), Some("8,100,3,3,1,1,42"));
    assert_eq!(finsolv(&["sweep", "8", "0", "3"]).status.code(), Some(2));
}

#[test]
fn dims_table() {
    let mut edges: Vec<String> = (0..20).map(|i| format!("{} {}", i, (i + 1) % 20)).collect();
    edges.extend((0..18).map(|i| format!("{} {}", i, (i + 2) % 20)));
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "g.txt", &edges.join("\n"));
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&finsolv(&["dims", &p, "--format", "json"]))).unwrap();
    assert_eq!(v["e3"], 415);
    assert_eq!(v["v3"], 240);
    assert_eq!(
        finsolv(&["dims", &p, "--format", "csv"]).status.code(),
        Some(2)
    );
}

#[test]
fn mining_ignores_thread_count() {
    let one = finsolv(&["mine", "7", "--format", "json", "--threads", "1"]);
    let four = finsolv(&["mine", "7", "--format", "json", "--threads", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}
