use std::path::Path;

use postsel_cli::report::validate_schema;
use serde_json::Value;

fn postsel(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_postsel"))
        .args(args)
        .env_remove("POSTSEL_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(out: &std::process::Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    validate_schema(&v).unwrap();
    v
}

#[test]
fn no_arguments_is_usage_error() {
    let out = postsel(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(postsel(&["maj-run", "--bogus"]).status.code(), Some(1));
}

#[test]
fn eps_out_of_range_is_precondition_error() {
    let out = postsel(&["maj-run", "--n", "32", "--eps", "0.6", "--weight", "16"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_io_error() {
    let out = postsel(&["rdeg", "--f", "/no/such/table", "--eps", "1/10", "--degree", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn maj_run_example() {
    let args = ["maj-run", "--n", "32", "--eps", "0.2", "--weight", "16", "--samples", "2000", "--seed", "7"];
    let v = json_of(&postsel(&args));
    assert_eq!(v["experiment"], "maj-run");
    assert_eq!(v["config"]["seed"], 7);
    let err = v["metrics"]["empirical_error"].as_f64().unwrap();
    assert!(err <= 0.2, "error {err}");
    assert!(v["metrics"]["max_queries"].as_u64().unwrap() > 0);
    // identical reruns, any thread count
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "4"]);
    assert_eq!(postsel(&args).stdout, postsel(&threaded).stdout);
}

#[test]
fn maj_run_exact_mode() {
    let v = json_of(&postsel(&["maj-run", "--n", "32", "--eps", "0.2", "--weight", "24", "--mode", "exact"]));
    assert!(v["metrics"]["error"].as_f64().unwrap() < 0.2);
}

#[test]
fn seed_from_environment() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_postsel"))
        .args(["or-demo", "--n", "2", "--samples", "10"])
        .env("POSTSEL_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["config"]["seed"], 99);
    assert_eq!(json_of(&postsel(&["or-demo", "--n", "2"]))["config"]["seed"], 0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# demo\nn = 4\neps0 = 0.2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json_of(&postsel(&["or-demo", "--config", cfg]));
    assert_eq!(v["config"]["n"], 4);
    assert_eq!(v["config"]["eps0"], 0.2);
    let v = json_of(&postsel(&["or-demo", "--config", cfg, "--n", "2"]));
    assert_eq!(v["config"]["n"], 2);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);

    std::fs::write(dir.path().join("bad.cfg"), "n = 2\ncolour = red\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    assert_eq!(postsel(&["or-demo", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn outputs_written_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    let out = postsel(&[
        "maj-curve", "--n", "16", "--eps", "0.25", "--points", "17",
        "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    validate_schema(&v).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("z,r\n"));
    assert_eq!(text.lines().count(), 18);
    assert!(!text.contains('\r'));
}

fn write_poly(path: &Path, json: &str) {
    std::fs::write(path, json).unwrap();
}

#[test]
fn compile_and_roundtrip_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (p, q) = (dir.path().join("p.json"), dir.path().join("q.json"));
    write_poly(&p, r#"{"n": 2, "terms": [{"subset": [1], "coeff": 1.0}, {"subset": [2], "coeff": 1.0}]}"#);
    write_poly(
        &q,
        r#"{"n": 2, "terms": [{"subset": [], "coeff": 0.05}, {"subset": [1], "coeff": 1.0}, {"subset": [2], "coeff": 1.0}]}"#,
    );
    let (p, q) = (p.to_str().unwrap(), q.to_str().unwrap());
    let v = json_of(&postsel(&["compile", "--p", p, "--q", q, "--f", "or:2"]));
    assert_eq!(v["metrics"]["queries_charged"], 1);
    assert!(v["metrics"]["max_error"].as_f64().unwrap() <= 0.05);
    let v = json_of(&postsel(&["roundtrip", "--p", p, "--q", q, "--f", "or:2", "--eps", "0.05"]));
    assert_eq!(v["metrics"]["passed"], true);
    let v = json_of(&postsel(&["extract", "--alg", "compiled", "--p", p, "--q", q, "--f", "or:2", "--eps", "0.05"]));
    assert_eq!(v["metrics"]["ratio_check"]["ok"], true);
}

#[test]
fn rdeg_and_newman_commands() {
    let v = json_of(&postsel(&["rdeg", "--f", "or:4", "--eps", "1/10", "--scan", "2"]));
    assert_eq!(v["metrics"]["degree"], 1);
    let v = json_of(&postsel(&["newman", "--degrees", "16,36,64", "--points", "500"]));
    assert!(v["metrics"]["fit"]["slope"].as_f64().unwrap() < 0.0);
    let v = json_of(&postsel(&["extract", "--n", "2", "--f", "or:2", "--eps", "0.02"]));
    assert_eq!(v["metrics"]["deg_q"], 1);
}
