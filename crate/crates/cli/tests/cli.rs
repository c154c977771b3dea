use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use translates::eval::{maxima_vector, MaxSearch, Window};
use translates::solver::SolveReport;
use translates::ProblemConfig;

const CHEBYSHEV: &str = r#"{"schema":1,"kernel":{"name":"log"},"field":{"name":"constant"},
  "multiplicities":[1,1],"domain":{"kind":"segment","a":0,"b":1}}"#;
const GAUSSIAN: &str = r#"{"schema":1,"kernel":{"name":"log"},"field":{"name":"gaussian"},
  "multiplicities":[1],"domain":{"kind":"axis"},"sample":{"nodes":[0],"t_range":[-3,3],"count":7}}"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_translates"))
        .args(&args[..1])
        .arg("--config")
        .arg(&path)
        .args(&args[1..])
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

#[test]
fn solve_chebyshev() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), CHEBYSHEV, &["solve"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let nodes: Vec<f64> = serde_json::from_value(v["nodes"].clone()).unwrap();
    assert!((nodes[0] - 0.146_446_609_4).abs() < 1e-8);
    assert!((nodes[1] - 0.853_553_390_6).abs() < 1e-8);
}

#[test]
fn solve_gaussian_to_file_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(dir.path(), GAUSSIAN, &["solve", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: SolveReport = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(report.nodes.as_slice()[0].abs() < 1e-8);
    let problem = ProblemConfig::from_json_str(GAUSSIAN).unwrap().problem().unwrap();
    let (lo, hi) = report.maxima.truncation_used;
    let again = maxima_vector(&problem, &report.nodes, Window::new(lo, hi).unwrap(), &MaxSearch::default()).unwrap();
    assert!((again.overline() - report.level).abs() < 1e-12);
}

#[test]
fn missing_kernel_name_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        r#"{"schema":1,"kernel":{},"field":{"name":"gaussian"},"multiplicities":[1]}"#,
        &["solve"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/kernel/name"));
}

#[test]
fn non_convergence_exits_two_with_report() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema":1,"kernel":{"name":"log"},"field":{"name":"constant"},
      "multiplicities":[1,1,1,1],"domain":{"kind":"segment","a":0,"b":1},
      "solver":{"max_iters":1,"spread_tol":1e-14}}"#;
    let out = run(dir.path(), cfg, &["solve"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["converged"], false);
}

#[test]
fn bojanov_hermite() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema":1,"kernel":{"name":"log"},"weight":{"name":"hermite"},"multiplicities":[1]}"#;
    let out = run(dir.path(), cfg, &["bojanov"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let norm = v["sup_norm"].as_f64().unwrap();
    assert!((norm - (-0.5 - 0.5 * std::f64::consts::LN_2).exp()).abs() < 1e-8);
    assert_eq!(v["alternation_points"].as_array().unwrap().len(), 2);
}

#[test]
fn bojanov_constant_weight_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema":1,"kernel":{"name":"log"},"weight":{"name":"constant","params":{"value":1}},"multiplicities":[1]}"#;
    let out = run(dir.path(), cfg, &["bojanov"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("admissib"));
}

#[test]
fn truncate_with_verification() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), GAUSSIAN, &["truncate", "--verify", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["certificate"]["q"].as_f64().unwrap() > 0.0);
    assert!(!v["certificate"]["anchors"].as_array().unwrap().is_empty());
    assert_eq!(v["verification"]["violations"], 0);
    assert_eq!(v["verification"]["seed"], 3);
}

#[test]
fn truncate_inadmissible_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema":1,"kernel":{"name":"log"},"field":{"name":"constant"},"multiplicities":[1]}"#;
    let out = run(dir.path(), cfg, &["truncate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("admissib"));
}

#[test]
fn sample_csv() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), GAUSSIAN, &["sample"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,F");
    assert_eq!(lines.len(), 8);
    assert!(lines.contains(&"0,-inf"));
    // F(0, 2) = -4 + ln 2
    let row: Vec<&str> = lines[6].split(',').collect();
    assert_eq!(row[0], "2");
    assert!((row[1].parse::<f64>().unwrap() - (-4.0 + 2f64.ln())).abs() < 1e-12);
}

#[test]
fn sample_rejects_single_point() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), GAUSSIAN, &["sample", "--count", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_respects_budget() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema":1,"kernel":{"name":"log"},"field":{"name":"gaussian"},"multiplicities":[1,1],
      "grid":{"box":3,"nodes_per_axis":41}}"#;
    let out = run(dir.path(), cfg, &["oracle", "--grid-budget", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(dir.path(), cfg, &["oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["duality_gap"].as_f64().unwrap() <= v["allowance"].as_f64().unwrap());
}
