//! End-to-end checks of the command-line surface: outputs, file formats,
//! and exit codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multittm"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn lb_prints_breakdown() {
    let out = run_ok(&["lb", "--n", "4,8,64", "--r", "2,2,2", "--P", "4"]);
    assert!(out.contains("A=56"));
    assert!(out.contains("B=520"));
    assert!(out.contains("lb=24"));
}

#[test]
fn grid_prints_all_three_grids_and_check() {
    let out = run_ok(&["grid", "--n", "4,8,64", "--r", "2,2,2", "--P", "4"]);
    assert!(out.contains("scenario I"));
    assert!(out.contains("p=1,1,4 q=1,1,1"));
    assert!(out.contains("3x-lb check: pass"));
    assert!(out.contains("best grid:"));
}

#[test]
fn simulate_reports_verified_words() {
    let out = run_ok(&[
        "simulate",
        "--n",
        "4,4,4",
        "--r",
        "2,2,2",
        "--grid",
        "p=2,2,2;q=1,1,1",
        "--seed",
        "42",
    ]);
    assert!(out.contains("words_per_rank=16 verified=true"), "{out}");
}

#[test]
fn simulate_trace_file() {
    let dir = std::env::temp_dir().join("multittm-cli-trace");
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.csv");
    run_ok(&[
        "simulate",
        "--n",
        "4,4,4",
        "--r",
        "2,2,2",
        "--grid",
        "p=2,2,2 q=1,1,1",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&trace).unwrap();
    // One line per collective: X, A1..A3, Y.
    assert_eq!(text.trim().lines().count(), 5);
    assert!(text.starts_with("all-gather,X,"));
    assert!(text.contains("reduce-scatter,Y,"));
}

#[test]
fn sweep_emits_exact_csv_header() {
    let out = run_ok(&["sweep", "--n", "16,16,16", "--r", "4,4,4", "--P", "2^1..2^3"]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "P,lb,lb_tensor,lb_matrix,alg_best,alg_best_tensor,alg_best_matrix,alg_fast,ttmseq,ttmseq_tensor,ttmseq_matrix,ttmseq_lb,first_ttm_lb,comp_overhead_pct"
    );
    assert_eq!(out.lines().count(), 4); // header + three rows
    assert!(out.lines().nth(1).unwrap().starts_with("2,"));
}

#[test]
fn sweep_json_has_metadata() {
    let out = run_ok(&[
        "sweep", "--n", "16,16", "--r", "4,4", "--P", "4", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["meta"]["shape"]["d"], 2);
    assert!(v["meta"]["version"].is_string());
    assert!(v["meta"]["git_hash"].is_string());
    assert_eq!(v["rows"][0]["p"], 4);
}

#[test]
fn repro_writes_csv_and_summary() {
    let dir = std::env::temp_dir().join("multittm-cli-repro");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig4b.csv");
    let out = run_ok(&["repro", "4b", "--out", path.to_str().unwrap()]);
    assert!(out.contains("fig 4b: max_gap_pct=13.0"), "{out}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("P,lb,"));
    assert_eq!(text.trim().lines().count(), 13); // header + P = 2^1..2^12
}

#[test]
fn repro_accepts_config_override() {
    let dir = std::env::temp_dir().join("multittm-cli-override");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("shape.conf");
    std::fs::write(&config, "# small override\nn = 16,16,16\nr = 2^2,4,4\nP = 2^1..2^4\n").unwrap();
    let path = dir.join("out.csv");
    let out = run_ok(&[
        "repro",
        "5a",
        "--config",
        config.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.contains("config override"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim().lines().count(), 5);
}

#[test]
fn shape_from_config_file() {
    let dir = std::env::temp_dir().join("multittm-cli-conf");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("shape.conf");
    std::fs::write(&config, "n = 4,8,64\nr = 2,2,2\n").unwrap();
    let out = run_ok(&["lb", "--config", config.to_str().unwrap(), "--P", "4"]);
    assert!(out.contains("lb=24"));
}

#[test]
fn invalid_input_exits_two() {
    let out = bin()
        .args(["lb", "--n", "1,4", "--r", "2,2", "--P", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["repro", "4z"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["simulate", "--n", "4,4", "--r", "2,2", "--grid", "p=3,1;q=1,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
