use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_conflictfree"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const SMALL_PREFS: &str = r#"{"a": [0.3, 0.25, 0.45], "b": [0.5, 0.2, 0.3]}"#;

fn tripling(n: u32) -> String {
    let d = (3f64.powi(n as i32) - 1.0) / 2.0;
    let w: Vec<f64> = (0..n).map(|i| 3f64.powi(i as i32) / d).collect();
    serde_json::json!({ "a": w, "b": w }).to_string()
}

#[test]
fn construct_zero_loss_branch() {
    let o = run(&["construct"], SMALL_PREFS);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["branch"], "zero-loss");
    assert!(v["loss"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["popularity"].as_array().unwrap().len(), 3);
    assert_eq!(v["matrix"]["n"], 3);
}

#[test]
fn construct_closed_form_branch() {
    let o = run(&["construct", "-"], &tripling(3));
    let v = json_out(&o);
    assert_eq!(v["branch"], "theorem2");
    assert!((v["loss"].as_f64().unwrap() - 75.0 / 676.0).abs() < 1e-12);
    assert_eq!(v["certificate"]["hot"], 2);
}

#[test]
fn exit_codes() {
    let o = run(&["construct"], "{not json");
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["kind"], "parse");

    let o = run(&["construct"], r#"{"a": [0.5, 0.6], "b": [0.5, 0.5]}"#);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(serde_json::from_slice::<Value>(&o.stderr).unwrap()["kind"], "total_mismatch");

    let o = run(&["construct", "--require-zero-loss"], &tripling(4));
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());

    let o = run(&["construct", "/nonexistent/prefs.json"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn construct_output_feeds_sample_and_verify() {
    let built = run(&["construct"], SMALL_PREFS);
    let text = String::from_utf8(built.stdout).unwrap();

    let o = run(&["sample", "--seed", "7", "--draws", "100000"], &text);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["diagonal_hits"], 0);
    assert!(v["max_marginal_deviation"].as_f64().unwrap() < 0.02);
    let again = run(&["sample", "--seed", "7", "--draws", "100000"], &text);
    assert_eq!(o.stdout, again.stdout);

    let o = run(&["verify", "--kkt", "--oracle", "--convexity", "--trials", "50"], &text);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_out(&o)["kkt"]["zero_loss"], true);
}

#[test]
fn csv_matrix_round_trip() {
    let built = run(&["construct", "--format", "csv"], SMALL_PREFS);
    let text = String::from_utf8(built.stdout).unwrap();
    assert!(text.starts_with("# branch=zero-loss"));
    let o = run(&["sample", "--seed", "1", "--draws", "1000", "--format", "csv"], &text);
    let rows: Vec<Vec<u64>> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().flatten().sum::<u64>(), 1000);
    assert!((0..3).all(|i| rows[i][i] == 0));
}

#[test]
fn verify_oracle_on_tripling() {
    let o = run(&["verify", "--oracle", "--kkt"], &tripling(4));
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert!(v["oracle"]["gap"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["kkt"]["valid"], true);
}

#[test]
fn verify_rejects_suboptimal_matrix() {
    let doc = serde_json::json!({
        "a": [0.3, 0.25, 0.45],
        "b": [0.5, 0.2, 0.3],
        "matrix": { "n": 3, "total": 1.0, "entries": [0.0, 0.2, 0.2, 0.2, 0.0, 0.2, 0.1, 0.1, 0.0] },
    });
    let o = run(&["verify", "--kkt", "--format", "csv"], &doc.to_string());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("kkt,"));
}

#[test]
fn bench_record_count_and_out_file() {
    let o = run(&["bench", "--families", "i,ii,iii,iv", "--n-max", "50"], "");
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 48 * 4);
    assert!(text.starts_with("family,N,method,loss\n"));

    let dir = std::env::temp_dir().join(format!("conflictfree-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.json");
    let o = run(
        &["bench", "--families", "iv", "--n-min", "3", "--n-max", "5", "--methods", "optimal", "--format", "json", "--summary", "--out"]
            .iter()
            .copied()
            .chain([path.to_str().unwrap()])
            .collect::<Vec<_>>(),
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stderr).unwrap().contains("optimal"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["N"], 3);
    std::fs::remove_dir_all(dir).unwrap();

    let o = run(&["bench", "--families", "v"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn baselines() {
    let o = run(&["baseline", "--method", "order"], SMALL_PREFS);
    let v = json_out(&o);
    assert!((v["matrix"]["entries"][1].as_f64().unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(v["degenerate"], false);

    let point = r#"{"a": [1.0, 0.0, 0.0], "b": [1.0, 0.0, 0.0]}"#;
    let o = run(&["baseline", "--method", "renorm"], point);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(serde_json::from_slice::<Value>(&o.stderr).unwrap()["kind"], "degenerate_product");
    let o = run(&["baseline", "--method", "renorm", "--fallback-uniform"], point);
    assert_eq!(json_out(&o)["fallback_uniform"], true);
}

#[test]
fn feasibility_verdicts() {
    let hot = r#"{"players": [[0.5, 0.25, 0.25, 0.0], [0.5, 0.25, 0.25, 0.0], [0.25, 0.25, 0.25, 0.25]]}"#;
    let o = run(&["feasibility", "--players", "3", "--oracle"], hot);
    let v = json_out(&o);
    assert_eq!(v["verdict"], "infeasible");
    assert!(v["oracle"]["loss"].as_f64().unwrap() > 1e-9);

    let flat = r#"{"players": [[0.25, 0.25, 0.25, 0.25], [0.25, 0.25, 0.25, 0.25], [0.25, 0.25, 0.25, 0.25]]}"#;
    assert_eq!(json_out(&run(&["feasibility"], flat))["verdict"], "conjectured_feasible");
    assert_eq!(run(&["feasibility", "--players", "2"], flat).status.code(), Some(2));
}
