//! Acceptance criteria, one test each. Every test prints a single
//! `criterion K: PASS|FAIL` line and checks the wall-clock limit.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use postsel_cli::criteria::run_criterion;
use postsel_cli::report::{validate_schema, Report};
use postsel_cli::reproducibility;

const SEED: u64 = 20_240_601;

// Written past the harness capture so every verdict shows in plain `cargo test`.
fn verdict(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn check(k: u32, limit: Duration) -> Report {
    let start = Instant::now();
    let report = run_criterion(k, SEED).expect("criterion runs");
    let elapsed = start.elapsed();
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    validate_schema(&json).unwrap();
    let passed = report.passed() == Some(true);
    let in_time = elapsed <= limit;
    verdict(format!(
        "criterion {k}: {} ({:.2} s of {} s) {}",
        if passed && in_time { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        serde_json::to_string(&report.metrics).unwrap()
    ));
    assert!(passed, "criterion {k} failed: {}", report.to_json());
    assert!(in_time, "criterion {k} took {elapsed:?}, limit {limit:?}");
    report
}

#[test]
fn criterion_01_qubit_equivalence() {
    check(1, Duration::from_secs(10));
}

#[test]
fn criterion_02_overlap_premises() {
    check(2, Duration::from_secs(5));
}

#[test]
fn criterion_03_exact_matches_sampled() {
    check(3, Duration::from_secs(120));
}

#[test]
fn criterion_04_b_elimination_closed_form() {
    let r = check(4, Duration::from_secs(1));
    assert_eq!(r.metrics["error"], "17/65536");
}

#[test]
fn criterion_05_majority_contract() {
    check(5, Duration::from_secs(300));
}

#[test]
fn criterion_06_or_extraction() {
    check(6, Duration::from_secs(5));
}

#[test]
fn criterion_07_compiler() {
    check(7, Duration::from_secs(5));
}

#[test]
fn criterion_08_newman_classic() {
    check(8, Duration::from_secs(30));
}

#[test]
fn criterion_09_quantum_sign() {
    let r = check(9, Duration::from_secs(600));
    assert_eq!(r.metrics["n"], 32);
}

#[test]
fn criterion_10_lp_oracle() {
    let r = check(10, Duration::from_secs(120));
    assert_eq!(r.metrics["or4_degree"], 1);
}

#[test]
fn criterion_11_thread_count_reproducibility() {
    let (report, _) = reproducibility(SEED, BTreeMap::new()).expect("criteria run");
    let passed = report.passed() == Some(true);
    verdict(format!(
        "criterion 11: {} {}",
        if passed { "PASS" } else { "FAIL" },
        serde_json::to_string(&report.rows).unwrap()
    ));
    assert!(passed, "{}", report.to_json());
}
