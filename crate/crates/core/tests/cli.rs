mod common;

use std::path::{Path, PathBuf};

use riemopt::maxcut::cli::{self, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_OK, EXIT_UNCERTIFIED};
use riemopt::solvers::HISTORY_CSV_HEADER;
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let mut argv = vec!["maxcut"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write_graph(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn triangle_solve_reports_certified_bound() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write_graph(dir.path(), "k3.txt", "1 2\n2 3\n1 3\n");
    let o = run(&["solve", "--graph", k3.to_str().unwrap(), "--rank", "2", "--escalate", "--seed", "7", "--out", "json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["cut"].as_f64(), Some(2.0));
    assert!((v["bound"].as_f64().unwrap() - 2.25).abs() < 1e-6);
    assert_eq!(v["certified"], Value::Bool(true));
    assert_eq!(v["n"].as_u64(), Some(3));
    assert_eq!(v["seed"].as_u64(), Some(7));
    let keys = ["n", "rank_used", "cost", "cut", "bound", "certified", "seed", "iterations", "time_seconds"];
    let positions: Vec<usize> = keys
        .iter()
        .map(|k| o.stdout.find(&format!("\"{k}\":")).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{}", o.stdout);
    assert_eq!(v.as_object().unwrap().len(), keys.len());
}

#[test]
fn check_prints_two_passing_reports() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write_graph(dir.path(), "k3.txt", "1 2\n2 3\n1 3\n");
    let o = run(&["check", "--graph", k3.to_str().unwrap(), "--rank", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    assert!(o.stdout.contains("gradient check: PASS"), "{}", o.stdout);
    assert!(o.stdout.contains("hessian check: PASS"), "{}", o.stdout);
    assert_ne!(EXIT_CHECK_FAILED, EXIT_OK);
}

#[test]
fn missing_graph_is_a_usage_error() {
    let o = run(&["solve"]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("--graph"), "{}", o.stderr);
    assert!(o.stderr.contains("Usage"), "{}", o.stderr);
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_flags_and_values_are_usage_errors() {
    assert_eq!(run(&["solve", "--graph", "x", "--bogus"]).code, EXIT_INPUT);
    assert_eq!(run(&["solve", "--graph", "x", "--solver", "newton"]).code, EXIT_INPUT);
    assert_eq!(run(&["solve", "--graph", "x", "--rank", "two"]).code, EXIT_INPUT);
    assert_eq!(run(&[]).code, EXIT_INPUT);
}

#[test]
fn help_goes_to_stdout_with_success() {
    let o = run(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("solve") && o.stdout.contains("check"));
}

#[test]
fn unreadable_or_malformed_graphs_exit_with_input_error() {
    let o = run(&["solve", "--graph", "/no/such/file.txt"]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("/no/such/file.txt"), "{}", o.stderr);

    let dir = tempfile::tempdir().unwrap();
    let bad = write_graph(dir.path(), "bad.txt", "1 2\n2 2 1.0\n");
    let o = run(&["solve", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("line 2") && o.stderr.contains("self-loop"), "{}", o.stderr);
}

#[test]
fn csv_and_text_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = write_graph(dir.path(), "c4.txt", "1 2\n2 3\n3 4\n4 1\n");
    let g = c4.to_str().unwrap();

    let o = run(&["solve", "--graph", g, "--out", "csv", "--no-timing"]);
    assert_eq!(o.code, EXIT_OK);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,rank_used,cost,cut,bound,certified,seed,iterations,time_seconds");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[3], "4");
    assert_eq!(fields[5], "true");
    assert_eq!(fields[8], "0");

    let o = run(&["solve", "--graph", g, "--solver", "cg"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("certified:   true"), "{}", o.stdout);
    assert!(o.stdout.contains("cut:         4"), "{}", o.stdout);
}

#[test]
fn history_file_has_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "pet.txt", &common::edge_list(&common::petersen()));
    let hist = dir.path().join("h.csv");
    let o = run(&[
        "solve",
        "--graph",
        g.to_str().unwrap(),
        "--escalate",
        "--out",
        "json",
        "--history",
        hist.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let text = std::fs::read_to_string(&hist).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HISTORY_CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    // One record per iterate, the starting point of every rank included.
    assert!(rows.len() as u64 >= v["iterations"].as_u64().unwrap());
    assert!(v["time_seconds"].as_f64().unwrap() > 0.0);
}

#[test]
fn uncertified_escalation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "pet.txt", &common::edge_list(&common::petersen()));
    let o = run(&["solve", "--graph", g.to_str().unwrap(), "--escalate", "--max-iter", "1", "--out", "json"]);
    assert_eq!(o.code, EXIT_UNCERTIFIED, "{}", o.stdout);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["certified"], Value::Bool(false));
    assert!(v["bound"].is_null());
    assert!(v["cut"].as_f64().unwrap() <= 12.0);

    // Without --escalate an uncertified answer is still a success.
    let o = run(&["solve", "--graph", g.to_str().unwrap(), "--max-iter", "1"]);
    assert_eq!(o.code, EXIT_OK);
}

#[test]
fn invalid_rank_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(dir.path(), "k3.txt", "1 2\n2 3\n1 3\n");
    let g = g.to_str().unwrap();
    assert_eq!(run(&["solve", "--graph", g, "--rank", "1", "--escalate"]).code, EXIT_INPUT);
    assert_eq!(run(&["solve", "--graph", g, "--rank", "0"]).code, EXIT_INPUT);
    assert_eq!(run(&["solve", "--graph", g, "--rank", "4"]).code, EXIT_INPUT);
}
