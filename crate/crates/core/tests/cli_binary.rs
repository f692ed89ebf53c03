mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const EXAMPLE: &str = "p cnf 3 3\n1 2 0\n1 -2 0\n2 3 0\n";

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tetris-count"))
}

fn with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = exe().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn counts_a_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("example.cnf");
    std::fs::write(&path, EXAMPLE).unwrap();
    let o = exe().arg("count").arg(&path).arg("--verify").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("s MODELS 3\n"), "{text}");
    assert!(text.contains("c verify ok"));
}

#[test]
fn enumerates_from_stdin() {
    let o = with_stdin(&["enumerate", "--ordering", "identity", "-"], EXAMPLE);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let models: Vec<&str> = text.lines().filter(|l| l.starts_with("v ")).collect();
    assert_eq!(models, ["v 1 -2 3 0", "v 1 2 -3 0", "v 1 2 3 0"]);
    assert!(text.contains("s MODELS 3"));
}

#[test]
fn exit_codes() {
    assert_eq!(with_stdin(&["count", "-"], "p cnf 2 1\n1 3 0\n").status.code(), Some(2));
    assert_eq!(with_stdin(&["count", "--insertion-ratio", "-0.1", "-"], EXAMPLE).status.code(), Some(1));
    assert_eq!(exe().args(["count", "/definitely/missing.cnf"]).output().unwrap().status.code(), Some(1));
    assert_eq!(exe().output().unwrap().status.code(), Some(1));
}

#[test]
fn timeout_reports_unknown() {
    let dimacs = common::all_interval_series(7).to_dimacs();
    let o = with_stdin(&["count", "--timeout", "0", "-"], &dimacs);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l == "s UNKNOWN"));
}

#[test]
fn gen_then_count_matches_the_subgraph_oracle() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.txt");
    let cnf = dir.path().join("g.cnf");
    std::fs::write(&graph, "0 1\n1 2\n2 3\n3 0\n0 2\n").unwrap();
    for (query, size, expected) in [("clique", "3", 2), ("path", "2", 5), ("path", "3", 8)] {
        let o = exe().args(["gen", "--query", query, "--size", size, "--out"]).arg(&cnf).arg(&graph).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let o = exe().arg("count").arg(&cnf).output().unwrap();
        assert!(stdout(&o).starts_with(&format!("s MODELS {expected}\n")), "{query} {size}: {}", stdout(&o));
    }
}

#[test]
fn stats_prints_an_ordering() {
    let o = with_stdin(&["stats", "--ordering", "minfill", "-"], EXAMPLE);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("c variables 3\nc clauses 3\n"));
    let order = text.lines().find_map(|l| l.strip_prefix("o ")).unwrap();
    let mut vars: Vec<u32> = order.split(' ').map(|v| v.parse().unwrap()).collect();
    vars.sort();
    assert_eq!(vars, [1, 2, 3]);
}
