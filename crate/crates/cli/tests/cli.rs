use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use sufctl::{bench, run, Cli, CliError};
use sufficient_control::graph::parse_edge_list;
use tempfile::TempDir;

const WORKED_EXAMPLE: &str =
    "1 2\n2 3\n3 4\n4 5\n6 7\n7 8\n8 9\n9 10\n11 12\n12 13\n13 11\n14 12\n";

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("sufctl").chain(args.iter().copied())).unwrap()
}

fn run_args(args: &[&str]) -> Result<String, CliError> {
    run(&cli(args))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_sufctl"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn edge_lines(text: &str) -> usize {
    text.lines()
        .filter(|l| l.split_whitespace().count() >= 2)
        .count()
}

#[test]
fn gen_er_has_exact_edge_count_and_is_deterministic() {
    let text = run_args(&["gen", "--seed", "7", "er", "--n", "1000", "--mu", "4"]).unwrap();
    assert_eq!(edge_lines(&text), 2000);
    let g = parse_edge_list(&text).unwrap();
    assert_eq!(g.edge_count(), 2000);
    let again = run_args(&["--seed", "7", "gen", "er", "--n", "1000", "--mu", "4"]).unwrap();
    assert_eq!(text, again);
}

#[test]
fn gen_ba_is_deterministic() {
    let a = run_args(&["--seed", "7", "gen", "ba", "--n", "100", "--m", "3"]).unwrap();
    let b = run_args(&["--seed", "7", "gen", "ba", "--n", "100", "--m", "3"]).unwrap();
    assert_eq!(a, b);
    let sized = run_args(&["gen", "ba", "--n", "100", "--edges", "344"]).unwrap();
    assert_eq!(edge_lines(&sized), 344);
}

#[test]
fn gen_rejects_impossible_density() {
    let err = run_args(&["gen", "er", "--n", "10", "--mu", "30"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert_eq!(exit_code(&["gen", "er", "--n", "10", "--mu", "30"]), 1);
}

#[test]
fn curve_rows() {
    let dir = TempDir::new().unwrap();
    let chain = write(&dir, "chain.txt", "0 1\n1 2\n2 3\n");
    let out = run_args(&["curve", s(&chain)]).unwrap();
    assert_eq!(out.lines().skip(1).collect::<Vec<_>>(), vec!["1,4,1.0,1.0"]);

    let edgeless = write(&dir, "edgeless.txt", "0\n1\n2\n");
    let out = run_args(&["curve", s(&edgeless)]).unwrap();
    let rows: Vec<_> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("3,3,1.0,1.0"));

    let json = run_args(&["--format", "json", "curve", s(&chain)]).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed[0]["rmax"], 4);
}

#[test]
fn curve_on_large_er_reaches_half_with_one_controller() {
    let dir = TempDir::new().unwrap();
    let text = run_args(&["--seed", "1", "gen", "er", "--n", "1000", "--mu", "4"]).unwrap();
    let path = write(&dir, "er.txt", &text);
    let out = run_args(&["curve", s(&path)]).unwrap();
    let first: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert!(first[2].parse::<f64>().unwrap() > 0.5);
}

#[test]
fn place_and_verify_worked_example() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "example.txt", WORKED_EXAMPLE);
    let json = run_args(&["place", s(&graph), "-M", "4", "-R", "12", "--algo", "edcp"]).unwrap();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(
        report["segments"],
        serde_json::json!([[1, 2, 3], [4, 5], [6, 7, 8, 9], [11, 12, 13]])
    );
    let placement = write(&dir, "placement.json", &json);
    let out = run_args(&["verify", s(&graph), s(&placement)]).unwrap();
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "true");
    assert!(row[2].parse::<f64>().unwrap() <= 1e-6);
}

#[test]
fn place_elpgm_on_single_node() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "one.txt", "0\n");
    let trace = dir.path().join("trace.csv");
    let json = run_args(&[
        "place",
        s(&graph),
        "-M",
        "1",
        "-R",
        "1",
        "--algo",
        "elpgm",
        "--trace",
        s(&trace),
    ])
    .unwrap();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["drivers"], serde_json::json!([0]));
    assert_eq!(report["controlled"], serde_json::json!([0]));
    assert!((report["E_exact"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(fs::read_to_string(trace)
        .unwrap()
        .starts_with("restart,k,E\n"));
}

#[test]
fn place_rejects_oversized_targets() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "example.txt", WORKED_EXAMPLE);
    let err = run_args(&["place", s(&graph), "-M", "4", "-R", "20"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert_eq!(exit_code(&["place", s(&graph), "-M", "4", "-R", "20"]), 1);
    assert_eq!(exit_code(&["place", s(&graph), "-M", "5", "-R", "4"]), 1);
}

#[test]
fn place_reports_infeasible_cover() {
    let dir = TempDir::new().unwrap();
    // A star needs a driver per leaf beyond the first.
    let graph = write(&dir, "star.txt", "0 1\n0 2\n0 3\n0 4\n");
    assert_eq!(exit_code(&["place", s(&graph), "-M", "1", "-R", "4"]), 2);
}

#[test]
fn verify_rejects_duplicates_and_flags_uncontrollable() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "chain.txt", "0 1\n1 2\n");
    let dup = write(
        &dir,
        "dup.json",
        r#"{"drivers":[0,0],"controlled":[0,1,2],"segments":[],"E_estimate":null,"E_exact":null}"#,
    );
    let err = run_args(&["verify", s(&graph), s(&dup)]).unwrap_err();
    assert_eq!(err.exit_code(), 1);

    let tail = write(
        &dir,
        "tail.json",
        r#"{"drivers":[2],"controlled":[0],"segments":[],"E_estimate":null,"E_exact":null}"#,
    );
    let out = run_args(&["verify", s(&graph), s(&tail)]).unwrap();
    assert_eq!(out, "controllable,cost,residual\nfalse,,\n");
    let json = run_args(&["--format", "json", "verify", s(&graph), s(&tail)]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["controllable"], false);
}

#[test]
fn bench_table_is_deterministic_and_beats_naive() {
    let args = |seed: &str| {
        cli(&[
            "--seed",
            seed,
            "bench",
            "--network",
            "er",
            "--n",
            "100",
            "--edges",
            "300",
            "-M",
            "32",
        ])
    };
    let bench_of = |c: &Cli| match &c.command {
        sufctl::Command::Bench(b) => bench(b, c.seed, c.t_f).unwrap(),
        _ => unreachable!(),
    };
    let strip = |rows: &[sufctl::BenchRow]| {
        rows.iter()
            .map(|r| {
                (
                    r.network.clone(),
                    r.n,
                    r.edges,
                    r.fraction,
                    r.r,
                    r.algorithm,
                    r.cost,
                )
            })
            .collect::<Vec<_>>()
    };
    let a = bench_of(&args("7"));
    let b = bench_of(&args("7"));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.len(), 14);
    for pair in a.chunks(2) {
        assert_eq!(pair[0].algorithm, "edcp");
        assert_eq!(pair[1].algorithm, "naive");
        let naive = pair[1].cost.unwrap_or(f64::INFINITY);
        assert!(pair[0].cost.unwrap() <= naive, "{:?}", pair);
    }
    let csv = sufctl::bench_csv(&a);
    assert!(csv.starts_with("network,n,edges,fraction,M,R,algorithm,cost,wall_time_s\n"));
}

#[test]
fn bench_rejects_bad_fractions() {
    let c = cli(&["bench", "--fractions", "0.0,0.5"]);
    let sufctl::Command::Bench(b) = &c.command else {
        unreachable!()
    };
    assert_eq!(bench(b, 0, 2.0).unwrap_err().exit_code(), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(exit_code(&["place"]), 1);
    assert_eq!(exit_code(&["frobnicate"]), 1);
    assert_eq!(exit_code(&["--help"]), 0);
}
