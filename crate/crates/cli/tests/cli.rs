use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddinterp"))
        .args(args)
        .env_remove("DDINTERP_SEED")
        .output()
        .expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_consistent_and_inconsistent() {
    let d = data("dataset1.json");
    let o = run(&["verify", "--data", &d, "--L", "1", "--alpha", "0.07"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["consistent"], true);
    assert!(v["certificate"]["gamma"].is_array());
    assert!(v["tolerances"]["rank_tol"].is_number());

    let o = run(&["verify", "--data", &d, "--L", "1", "--alpha", "0.05"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["consistent"], false);
}

#[test]
fn verify_empty_data_is_consistent() {
    let o = run(&[
        "verify",
        "--data",
        &data("empty.json"),
        "--L",
        "0.1",
        "--alpha",
        "0",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn infer_alpha_mode() {
    let o = run(&["infer", "--data", &data("dataset1.json"), "--L", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["mode"], "alpha");
    let a = v["optimum"].as_f64().unwrap();
    assert!((0.05..=0.07).contains(&a), "{a}");
    assert!(v["cross_check_residual"].as_f64().unwrap() < 1e-3);
}

#[test]
fn infer_gain_mode_defaults_when_only_alpha_given() {
    let o = run(&["infer", "--data", &data("dataset1.json"), "--alpha", "0.06"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["mode"], "L");
    let l = v["optimum"].as_f64().unwrap();
    assert!((0.98..=1.02).contains(&l), "{l}");
}

#[test]
fn infer_gain_infeasible_reports_negative() {
    let o = run(&["infer", "--data", &data("dataset2.json"), "--alpha", "0.1"]);
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["feasible"], false);
    assert!(v["message"].is_string());
}

#[test]
fn curve_csv_is_nonincreasing() {
    let o = run(&[
        "infer",
        "--data",
        &data("dataset1.json"),
        "--mode",
        "curve",
        "--grid",
        "0.5,1,2,2.9",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("L,alpha_star"));
    let vals: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 4);
    assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
}

#[test]
fn predict_noisefree_json_and_svg() {
    let d = data("two_point.json");
    let o = run(&["predict", "--data", &d, "--x", "0.5,0.5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["set"]["tag"], "ExactEllipsoid");
    assert_eq!(v["set"]["members"].as_array().unwrap().len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("set.svg");
    let o = run(&[
        "predict",
        "--data",
        &d,
        "--x",
        "0.5,0.5",
        "--format",
        "svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(out).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polygon"));
}

#[test]
fn predict_union_is_seed_deterministic() {
    let d = data("dataset1.json");
    let args = [
        "predict",
        "--data",
        &d,
        "--L",
        "1",
        "--alpha",
        "0.1",
        "--samples",
        "8",
    ];
    let a = Command::new(env!("CARGO_BIN_EXE_ddinterp"))
        .args(args)
        .env("DDINTERP_SEED", "7")
        .output()
        .unwrap();
    let b = run(&[&args[..], &["--seed", "7"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["set"]["tag"], "InnerUnion");
}

#[test]
fn predict_degenerate_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = write_temp(
        &dir,
        "deg.json",
        r#"{"states": [[0, 1], [1, 0]], "B": [[0], [0]]}"#,
    );
    let o = run(&["predict", "--data", &d, "--x", "1,1"]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["set"]["tag"], "Degenerate");
    let o = run(&["predict", "--data", &d, "--x", "1,1", "--L", "1.001"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn predict_svg_for_higher_dimension_falls_back_to_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = write_temp(
        &dir,
        "d3.json",
        r#"{"states": [[1, 0, 0], [0.5, 0.1, 0]], "B": [[0], [0], [0]]}"#,
    );
    let o = run(&["predict", "--data", &d, "--x", "0,1,0", "--format", "svg"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("note:"));
    assert!(json(&o)["set"].is_object());
}

#[test]
fn safety_verdicts() {
    let d = data("empty.json");
    let o = run(&[
        "safety",
        "--data",
        &d,
        "--L",
        "1",
        "--x",
        "3,4",
        "--target-radius",
        "5.001",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["candidates"][0]["verdict"], "safe");
    let o = run(&[
        "safety",
        "--data",
        &d,
        "--L",
        "1",
        "--x",
        "3,4",
        "--target-radius",
        "4.999",
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["candidates"][0]["verdict"], "unsafe");
}

#[test]
fn cost_table_is_sorted() {
    let d = data("empty.json");
    let o = run(&[
        "cost", "--data", &d, "--L", "0.5", "--x", "3,4", "--u", "1", "--u", "0", "--u", "-2",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let table = v["table"].as_array().unwrap();
    let vals: Vec<f64> = table.iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
    assert!((vals[0] - 6.25).abs() < 1e-9);
    assert_eq!(table[0]["best"], true);
    assert_eq!(table[0]["u"][0].as_f64(), Some(0.0));
}

#[test]
fn malformed_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = write_temp(
        &dir,
        "bad.json",
        r#"{"states": [[1, 1], [2]], "B": [[0], [0]]}"#,
    );
    let o = run(&["verify", "--data", &d]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.starts_with("error:") && err.contains("states[1]"),
        "{err}"
    );
}

#[test]
fn missing_file_is_an_error() {
    let o = run(&["verify", "--data", "/nonexistent/file.json"]);
    assert_eq!(code(&o), 1);
}
