use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising-fisher")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let path = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--out", p]);
    let status = code(&all);
    (status, fs::read_to_string(&path).unwrap())
}

#[test]
fn zeros_writes_csv_with_positive_margins() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["zeros", "--family", "cycle", "--sizes", "3..12", "--delta-cap", "3", "--shrink", "0.05"];
    let (status, csv) = run_to(dir.path(), "zeros.csv", &args);
    assert_eq!(status, 0);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "family,n,delta,degree,num_zeros,margin,min_root_re,min_root_im");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let margin: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(margin > 0.0, "{row}");
    }
}

#[test]
fn saw_check_passes_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["saw-check", "--seed", "7", "--graphs", "100", "--n-max", "10"];
    let (s1, a) = run_to(dir.path(), "a.json", &args);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "1"]);
    let (s2, b) = run_to(dir.path(), "b.json", &threaded);
    assert_eq!((s1, s2), (0, 0));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"], 7);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["pairs"], 1000);
}

#[test]
fn verify_region_search_finds_delta() {
    let out = run(&["verify-region", "--beta", "0.5", "--delta-cap", "3", "--search"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["found"], true);
    assert!(v["delta"].as_f64().unwrap() > 0.0);
    assert!(v["delta_beta"].as_f64().unwrap() > 0.0);
    assert!(v["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_region_single_probe_is_deterministic() {
    let args = ["verify-region", "--beta", "2", "--beta-prime", "2.05-0.05i", "--delta", "0.1", "--samples", "2000", "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["passed"], true);
}

#[test]
fn failing_check_exits_one_with_witness() {
    // An imaginary floor far below Im β' cannot contract.
    let out = run(&["contraction", "--beta", "0.8+0.01i", "--k", "2", "--samples", "500"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(v["witness"].is_object());

    let ok = run(&["contraction", "--beta", "0.8", "--k", "2", "--samples", "500"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn approx_reports_errors_within_eps() {
    let out = run(&["approx", "--family", "complete", "--size", "4", "--beta", "0.9+0.05i,1.2-0.05i", "--eps", "1e-2,1e-4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in v["rows"].as_array().unwrap() {
        assert!(row["rel_error"].as_f64().unwrap() <= row["eps"].as_f64().unwrap());
    }
    // Outside the certified disc the row fails.
    assert_eq!(code(&["approx", "--family", "cycle", "--size", "6", "--beta", "2.5"]), 1);
}

#[test]
fn generate_round_trips_through_approx() {
    let dir = tempfile::tempdir().unwrap();
    let (status, text) = run_to(dir.path(), "g.txt", &["generate", "--family", "random_regular", "--size", "8", "--seed", "4"]);
    assert_eq!(status, 0);
    assert!(text.lines().filter(|l| l.starts_with("e ")).count() == 12);
    let path = dir.path().join("g.txt");
    let out = run(&["approx", "--input", path.to_str().unwrap(), "--beta", "1.1+0.02i", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("beta_re,beta_im,eps,m_used,rho,rel_error,ok\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["zeros", "--family", "cycle"]), 2);
    assert_eq!(code(&["zeros", "--family", "hypercube", "--sizes", "3"]), 2);
    assert_eq!(code(&["zeros", "--family", "cycle", "--sizes", "3..x"]), 2);
    assert_eq!(code(&["approx", "--beta", "1+2", "--family", "cycle", "--size", "4"]), 2);
    assert_eq!(code(&["approx", "--beta", "1.1"]), 2);
    assert_eq!(code(&["verify-region", "--beta", "0.5"]), 2);
    assert_eq!(code(&["verify-region", "--beta", "0.5+0.1i", "--delta", "0.1"]), 2);
    assert_eq!(code(&["verify-region", "--beta", "5", "--delta", "0.1"]), 2);
    assert_eq!(code(&["verify-region", "--beta", "0.5", "--search", "--format", "csv"]), 2);
    assert_eq!(code(&["saw-check", "--n-max", "1"]), 2);
    assert_eq!(code(&["generate", "--family", "cycle", "--size", "2"]), 2);
    assert_eq!(code(&["--threads", "0", "generate", "--family", "path", "--size", "3"]), 2);
    assert_eq!(code(&["--help"]), 0);
}
