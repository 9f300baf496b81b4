use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn robustkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robustkit")).args(args).env_remove("ROBUSTKIT_LOG").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_model(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// min x subject to a x <= 1, x >= lower, a in [1, 2].
fn interval_model(sense: &str, lower: &str, upper: &str, objective: &str) -> String {
    format!(
        r#"{{
  "format_version": "1.0",
  "sense": "{sense}",
  "variables": [{{"name": "x", "domain": "continuous", "lower": {lower}, "upper": {upper}}}],
  "unc_groups": [{{"name": "a", "size": 1, "nominal": [1.0],
                   "uncset": {{"type": "polyhedral", "mat": [[1.0], [-1.0]], "rhs": [2.0, -1.0]}}}}],
  "constraints": [{{"expr": {{"bilin": [[0, 0, 1.0]]}}, "sense": "<=", "rhs": 1.0}}],
  "objective": {objective}
}}"#
    )
}

#[test]
fn knapsack_json_result() {
    let knapsack = fixture("knapsack.json");
    let out = robustkit(&["solve", knapsack.to_str().unwrap(), "--solver", "reformulate", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["objective"], 18.0);
    assert_eq!(v["stats"]["cuts_added"], 0);
    assert!(v["worst_case"].as_array().unwrap().iter().all(|r| r["slack"].as_f64().unwrap() >= -1e-9));
}

#[test]
fn every_solver_runs_every_fixture() {
    for name in ["knapsack.json", "diamond.json", "c_model.json", "portfolio.json", "facility.json"] {
        let path = fixture(name);
        for solver in ["reformulate", "cuts", "nominal"] {
            let out = robustkit(&["solve", path.to_str().unwrap(), "--solver", solver]);
            assert_eq!(code(&out), 0, "{name} {solver}: {}", stderr(&out));
            let text = stdout(&out);
            let header = text.lines().next().unwrap();
            for col in ["status", "objective", "iterations"] {
                assert!(header.contains(col), "{header}");
            }
            assert!(text.lines().nth(1).unwrap().contains("optimal"));
        }
    }
}

#[test]
fn status_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let infeasible = write_model(dir.path(), "inf.json", &interval_model("min", "1.0", "5.0", r#"{"lin_x": [[0, 1.0]]}"#));
    let unbounded = write_model(dir.path(), "unb.json", &interval_model("min", "null", "null", r#"{"lin_x": [[0, 1.0]]}"#));
    for solver in ["reformulate", "cuts"] {
        assert_eq!(code(&robustkit(&["solve", &infeasible, "--solver", solver])), 2);
        assert_eq!(code(&robustkit(&["solve", &unbounded, "--solver", solver])), 3);
    }
    // One master solve cannot separate the ellipsoid.
    let portfolio = fixture("portfolio.json");
    let out = robustkit(&["solve", portfolio.to_str().unwrap(), "--solver", "cuts", "--max-iter", "1", "--format", "json"]);
    assert_eq!(code(&out), 4);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "iter_limit");
    assert!(v["max_violation"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&robustkit(&[])), 64);
    assert_eq!(code(&robustkit(&["frobnicate"])), 64);
    let knapsack = fixture("knapsack.json");
    assert_eq!(code(&robustkit(&["solve", knapsack.to_str().unwrap(), "--solver", "simplex"])), 64);
    assert_eq!(code(&robustkit(&["solve", knapsack.to_str().unwrap(), "--cut-tol", "tiny"])), 64);
    assert_eq!(code(&robustkit(&["sweep", "knapsack", "--geometry", "poly", "--seed", "1", "--out", "x.csv"])), 64);
    assert_eq!(code(&robustkit(&["--help"])), 0);
}

#[test]
fn parse_and_validation_errors_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = write_model(dir.path(), "bad.json", "{ not json");
    let out = robustkit(&["solve", &garbage]);
    assert_eq!(code(&out), 65);
    assert!(stderr(&out).contains("parse error"));

    let text = fs::read_to_string(fixture("knapsack.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["unc_groups"][0]["nominal"].as_array_mut().unwrap().pop();
    let short = write_model(dir.path(), "short.json", &doc.to_string());
    let out = robustkit(&["solve", &short]);
    assert_eq!(code(&out), 65);
    assert!(stderr(&out).contains("unc_groups[0].nominal"), "{}", stderr(&out));

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["colour"] = "blue".into();
    let extra = write_model(dir.path(), "extra.json", &doc.to_string());
    assert_eq!(code(&robustkit(&["solve", &extra])), 65);

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["format_version"] = "9.9".into();
    let version = write_model(dir.path(), "version.json", &doc.to_string());
    let out = robustkit(&["solve", &version]);
    assert_eq!(code(&out), 65);
    assert!(stderr(&out).contains("format_version"));
}

#[test]
fn missing_input_file() {
    assert_eq!(code(&robustkit(&["solve", "/nonexistent/model.json"])), 66);
}

#[test]
fn writes_result_and_counterpart() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("result.json");
    let cp = dir.path().join("cp.json");
    let diamond = fixture("diamond.json");
    let out = robustkit(&[
        "solve",
        diamond.to_str().unwrap(),
        "--out",
        result.to_str().unwrap(),
        "--export-counterpart",
        cp.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(r["status"], "optimal");

    let cp: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cp).unwrap()).unwrap();
    let names: Vec<&str> = cp["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for k in 0..4 {
        assert!(names.contains(&format!("lam[c0][{k}]").as_str()), "{names:?}");
    }
    assert!(!names.contains(&"lam[c0][4]"));
    let rows = cp["rows"].as_array().unwrap();
    let count = |kind: &str| rows.iter().filter(|r| r["origin"]["kind"] == kind && r["origin"]["source"] == "c0").count();
    assert_eq!(count("dual_equality"), 2);
    assert_eq!(count("dual_budget"), 1);
}

#[test]
fn nominal_counterpart_has_no_auxiliary_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let knapsack = fixture("knapsack.json");
    let out = robustkit(&["solve", knapsack.to_str().unwrap(), "--solver", "nominal", "--export-counterpart", cp.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let cp: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cp).unwrap()).unwrap();
    assert!(cp["columns"].as_array().unwrap().iter().all(|c| c["origin"]["kind"] == "model"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = robustkit(&[
        "sweep",
        "knapsack",
        "--alphas",
        "0,0.5,1",
        "--geometry",
        "ellip",
        "--seed",
        "4",
        "--jobs",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("median transform_ms"));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "case,seed,alpha,geometry,solver,status,objective,normalized,cuts_added,iterations,transform_ms,solve_ms"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert!((rows[0][7].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    for r in &rows {
        assert_eq!((r[0], r[1], r[3], r[5]), ("knapsack", "4", "ellip", "optimal"));
    }
}

#[test]
fn sweep_rejects_bad_size() {
    let out = robustkit(&["sweep", "facility", "--alphas", "0", "--geometry", "poly", "--seed", "1", "--size", "3", "--out", "x.csv"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn check_reports_robustness() {
    let dir = tempfile::tempdir().unwrap();
    let knapsack = fixture("knapsack.json");
    let robust = write_model(dir.path(), "robust.json", r#"{"x": [1, 0, 1]}"#);
    let out = robustkit(&["check", knapsack.to_str().unwrap(), "--point", &robust]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["feasible"], true);

    // The nominal optimum overloads the knapsack at the heaviest weights.
    let nominal = write_model(dir.path(), "nominal.json", r#"{"x": [1, 1, 1]}"#);
    let out = robustkit(&["check", knapsack.to_str().unwrap(), "--point", &nominal]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["max_violation"].as_f64().unwrap() - 2.5).abs() < 1e-9);

    let short = write_model(dir.path(), "short.json", r#"{"x": [1]}"#);
    assert_eq!(code(&robustkit(&["check", knapsack.to_str().unwrap(), "--point", &short])), 65);
}

#[test]
fn log_level_from_environment() {
    let knapsack = fixture("knapsack.json");
    let out = Command::new(env!("CARGO_BIN_EXE_robustkit"))
        .args(["solve", knapsack.to_str().unwrap()])
        .env("ROBUSTKIT_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("INFO"), "{}", stderr(&out));
    assert!(stderr(&robustkit(&["solve", knapsack.to_str().unwrap()])).is_empty());
}
