//! Reproduction scripts for the acceptance criteria. Each returns a report
//! whose `passed` metric is the verdict; tolerances are fixed here.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive};
use postsel::boolfn::{extract_pq, ratio_check, MultilinearPoly, TruthTable};
use postsel::compile::{compile_rational, compile_report, error_formula, roundtrip};
use postsel::constructions::{aaronson_qubit, aaronson_qubit_circuit, ab_angle_grid, OrDemo};
use postsel::majority::{
    build_family_a, build_family_b, eliminate_a_exact, eliminate_a_sample, eliminate_b_exact,
    eliminate_b_exact_rational, eliminate_b_sample, rho_plus, MajorityInput, MajorityParams,
    MajorityPlan, LAMBDA_SQ,
};
use postsel::newman::{error_grid, fit_decay, newman_abs_grid, quantum_sign, sgn, uniform_grid, DomainTag};
use postsel::qsim::{mask_to_bits, QueryCounter};
use postsel::rdeg::{parse_rational, rdeg_feasible, scan_degree, verify_witness};
use postsel::{replicate, BigRational};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::experiments::{bits_of_weight, majority_monte_carlo, task};
use crate::report::Report;

pub const CRITERIA: std::ops::RangeInclusive<u32> = 1..=10;

/// Runs criterion `k` (1 to 10) with the given master seed.
pub fn run_criterion(k: u32, seed: u64) -> Result<Report> {
    let mut config = BTreeMap::new();
    config.insert("criterion".to_string(), Value::from(k));
    config.insert("seed".to_string(), Value::from(seed));
    let mut report = Report::new(format!("criterion-{k}"), config);
    match k {
        1 => qubit_equivalence(&mut report)?,
        2 => overlap_premises(&mut report)?,
        3 => exact_vs_sampled(&mut report, seed)?,
        4 => b_closed_form(&mut report)?,
        5 => majority_contract(&mut report, seed)?,
        6 => or_extraction(&mut report)?,
        7 => compiler(&mut report)?,
        8 => newman_classic(&mut report)?,
        9 => quantum_sign_check(&mut report)?,
        10 => lp_oracle(&mut report)?,
        _ => return Err(CliError::Usage(format!("criterion {k} outside 1..=11"))),
    }
    Ok(report)
}

// 1: circuit qubit against the closed form.
const QUBIT_TOL: f64 = 1e-10;

fn qubit_equivalence(report: &mut Report) -> Result<()> {
    let grid = ab_angle_grid(25);
    let mut passed = true;
    for n in [2usize, 4, 8, 16] {
        let per_x: Vec<(f64, u64)> = (0..1usize << n)
            .into_par_iter()
            .map(|m| {
                let x = mask_to_bits(m, n);
                let z = x.iter().filter(|&&b| b).count() as f64;
                let mut worst = (0.0f64, 0u64);
                for &ab in &grid {
                    let mut counter = QueryCounter::new();
                    let c = aaronson_qubit_circuit(&x, ab, &mut counter)?;
                    let closed = aaronson_qubit(n, z, ab)?.canonical_sign();
                    worst.0 = worst.0.max(c.qubit.max_abs_diff(&closed));
                    worst.1 = worst.1.max(counter.count());
                    if counter.count() != 1 {
                        worst.1 = u64::MAX;
                    }
                }
                Ok(worst)
            })
            .collect::<postsel::Result<_>>()?;
        let max_diff = per_x.iter().map(|w| w.0).fold(0.0, f64::max);
        let queries_ok = per_x.iter().all(|w| w.1 == 1);
        let ok = max_diff <= QUBIT_TOL && queries_ok;
        passed &= ok;
        report.push_row(json!({"n": n, "inputs": per_x.len(), "ab_pairs": grid.len(),
            "max_abs_diff": max_diff, "one_query_each": queries_ok, "ok": ok}));
    }
    report.metric("tolerance", QUBIT_TOL).metric("passed", passed);
    Ok(())
}

// 2: the overlap bounds the elimination analysis relies on.
const OVERLAP_SLACK: f64 = 1e-12;

fn overlap_premises(report: &mut Report) -> Result<()> {
    let n = 64usize;
    let mut passed = true;
    for t in [1usize, 2, 4] {
        let a = build_family_a(n, t)?;
        let b = build_family_b(n, t)?;
        let mut upper = 0.0f64;
        for s in n / 2..=n {
            for e in a.iter().chain(&b) {
                upper = upper.max(rho_plus(n, s as f64, e.ab));
            }
        }
        let mut lower = f64::INFINITY;
        for s in t..=n / 2 - t {
            let best = a.iter().map(|e| rho_plus(n, s as f64, e.ab)).fold(0.0, f64::max);
            lower = lower.min(best);
        }
        let ok = upper <= 0.5 + OVERLAP_SLACK && lower >= LAMBDA_SQ - OVERLAP_SLACK;
        passed &= ok;
        report.push_row(json!({"t": t, "family_a": a.len(), "family_b": b.len(),
            "max_rho_plus_upper_half": upper, "min_best_rho_plus_lower_half": lower, "ok": ok}));
    }
    report.metric("lambda_sq", LAMBDA_SQ).metric("passed", passed);
    Ok(())
}

// 3: exact elimination DPs against Monte Carlo.
const MC_RUNS: u64 = 100_000;
const SIGMAS: f64 = 4.0;

fn exact_vs_sampled(report: &mut Report, seed: u64) -> Result<()> {
    let pa = MajorityParams::new(16, 1)?;
    let pb = MajorityParams::new(32, 3)?;
    let mut passed = true;
    let cases: Vec<(&str, MajorityParams, f64, u64)> = [1.0, 4.0, 8.0, 12.0, 16.0]
        .iter()
        .enumerate()
        .map(|(i, &z)| ("A", pa, z, task::ELIM_A + i as u64))
        .chain(
            [1.0, 2.0, 14.0, 15.0, 16.0, 24.0]
                .iter()
                .enumerate()
                .map(|(i, &z)| ("B", pb, z, task::ELIM_B + i as u64)),
        )
        .collect();
    for (which, params, z, task_id) in cases {
        let exact = if which == "A" { eliminate_a_exact(&params, z)? } else { eliminate_b_exact(&params, z)? };
        let outs = replicate(MC_RUNS, seed, task_id, |rng| {
            let mut c = QueryCounter::new();
            if which == "A" {
                eliminate_a_sample(&params, z, rng, &mut c).map(|t| t.output_bit())
            } else {
                eliminate_b_sample(&params, z, rng, &mut c).map(|t| t.output_bit())
            }
        });
        let mut ones = 0u64;
        for o in outs {
            ones += o? as u64;
        }
        let empirical = ones as f64 / MC_RUNS as f64;
        let sigma = (exact * (1.0 - exact) / MC_RUNS as f64).sqrt();
        let ok = (empirical - exact).abs() <= SIGMAS * sigma + 1e-12;
        passed &= ok;
        report.push_row(json!({"procedure": which, "n": params.n, "t": params.t, "z": z,
            "exact": exact, "empirical": empirical, "sigma": sigma, "ok": ok}));
    }
    report.metric("runs", MC_RUNS).metric("sigmas", SIGMAS).metric("passed", passed);
    Ok(())
}

// 4: exact rational B-elimination error.
fn b_closed_form(report: &mut Report) -> Result<()> {
    let params = MajorityParams::new(64, 2)?;
    let z = BigRational::from_integer(32.into());
    let p_one = eliminate_b_exact_rational(&params, &z)?;
    let error = BigRational::one() - p_one;
    let expected = parse_rational("17/65536")?;
    report.metric("error", error.to_string());
    report.metric("expected", expected.to_string());
    report.metric("error_f64", error.to_f64());
    report.metric("passed", error == expected);
    Ok(())
}

// 5: the combined algorithm at N = 32, eps = 0.2.
const C5_RUNS: u64 = 10_000;
const C5_EPS: f64 = 0.2;
const C5_QUERY_CONSTANT: u64 = 400;

fn majority_contract(report: &mut Report, seed: u64) -> Result<()> {
    let n = 32usize;
    let plan = MajorityPlan::new(n, C5_EPS, true)?;
    let t = plan.t as u64;
    let mut log = 0u64;
    while (t << log) < n as u64 {
        log += 1;
    }
    let bound = C5_QUERY_CONSTANT * log * t;
    let sigma = (C5_EPS * (1.0 - C5_EPS) / C5_RUNS as f64).sqrt();
    let (mut errors_ok, mut max_queries) = (true, 0u64);
    for (i, s) in [0usize, 1, 8, 15, 16, 24, 32].into_iter().enumerate() {
        let bits = bits_of_weight(n, s);
        let stats = majority_monte_carlo(MajorityInput::Bits(&bits), C5_EPS, C5_RUNS, seed, task::MAJORITY + i as u64)?;
        // the guarded input 01x has weight s + 1 over N + 2 bits
        let truth = 2 * (s + 1) >= n + 2;
        let wrong = if truth { stats.runs - stats.ones } else { stats.ones };
        let error = wrong as f64 / stats.runs as f64;
        let ok = error <= C5_EPS + SIGMAS * sigma;
        errors_ok &= ok;
        max_queries = max_queries.max(stats.max_queries);
        report.push_row(json!({"weight": s, "truth": truth as u8, "empirical_error": error,
            "max_queries": stats.max_queries, "mean_queries": stats.total_queries as f64 / stats.runs as f64,
            "ok": ok}));
    }
    let queries_ok = max_queries <= bound;
    report.metric("t", t).metric("reps", plan.reps).metric("sigma", sigma);
    report.metric("errors_ok", errors_ok);
    report.metric("max_queries", max_queries).metric("query_bound", bound);
    report.metric("queries_ok", queries_ok);
    report.metric("passed", errors_ok && queries_ok);
    Ok(())
}

// 6: acceptance polynomials of the OR demo.
const COEFF_TOL: f64 = 1e-9;

fn or_extraction(report: &mut Report) -> Result<()> {
    let eps0 = 0.1f64;
    let mut passed = true;
    for n in [2usize, 4] {
        let pair = extract_pq(&OrDemo::new(n, eps0)?)?;
        let slope = (1.0 - eps0 * eps0) / n as f64;
        let q_ref = MultilinearPoly::weight_linear(n, eps0 * eps0, slope);
        let p_ref = MultilinearPoly::weight_linear(n, 0.0, slope);
        let diff = |a: &MultilinearPoly, b: &MultilinearPoly| {
            (0..1usize << n).map(|m| (a.coeff(m) - b.coeff(m)).abs()).fold(0.0, f64::max)
        };
        let (dp, dq) = (diff(&pair.p, &p_ref), diff(&pair.q, &q_ref));
        let bound = eps0 * eps0 * n as f64 / (eps0 * eps0 * n as f64 + 1.0 - eps0 * eps0);
        let check = ratio_check(&pair.p, &pair.q, &TruthTable::or(n), bound)?;
        let degrees_ok = pair.p.degree() <= 2 * pair.queries && pair.q.degree() <= 2 * pair.queries;
        let ok = dp <= COEFF_TOL && dq <= COEFF_TOL && degrees_ok && check.ok;
        passed &= ok;
        report.push_row(json!({"n": n, "queries": pair.queries, "deg_p": pair.p.degree(),
            "deg_q": pair.q.degree(), "max_coeff_diff_p": dp, "max_coeff_diff_q": dq,
            "error_bound": bound, "max_deviation": check.max_deviation, "ok": ok}));
    }
    report.metric("passed", passed);
    Ok(())
}

// 7: compile the OR2 witness and run it.
const FORMULA_TOL: f64 = 1e-10;

fn compiler(report: &mut Report) -> Result<()> {
    let eps = 0.05;
    let p = MultilinearPoly::weight_linear(2, 0.0, 1.0);
    let q = MultilinearPoly::weight_linear(2, eps, 1.0);
    let f = TruthTable::or(2);
    let alg = compile_rational(&p, &q)?;
    let rep = compile_report(&alg, &f)?;
    let mut rows_ok = rep.queries_charged == 1;
    for r in &rep.rows {
        let formula = error_formula(r.ratio, 1 - 2 * r.f as i8);
        let ok = (r.conditional_error - formula).abs() <= FORMULA_TOL && r.conditional_error <= eps;
        rows_ok &= ok;
        report.push_row(json!({"x": r.x, "f": r.f, "conditional_error": r.conditional_error,
            "formula": formula, "success_prob": r.success_prob, "queries": r.queries, "ok": ok}));
    }
    let rt = roundtrip(&f, &p, &q, eps);
    let rt_ok = rt.passed && rt.extracted_degree.is_some_and(|d| d <= 2);
    report.metric("queries_charged", rep.queries_charged);
    report.metric("max_error", rep.max_error);
    report.metric("roundtrip", &rt);
    report.metric("passed", rows_ok && rt_ok);
    Ok(())
}

// 8: classical rational approximation of |x|.
const NEWMAN_POINTS: usize = 10_000;
const NEWMAN_SLOPE: f64 = -0.9;

fn newman_classic(report: &mut Report) -> Result<()> {
    let degrees = [16usize, 36, 64, 100];
    let mut errs = Vec::new();
    let mut bounds_ok = true;
    for d in degrees {
        let g = newman_abs_grid(d, NEWMAN_POINTS)?;
        let bound = (-0.5 * (d as f64).sqrt()).exp();
        bounds_ok &= g.max_error <= bound;
        errs.push((d, g.max_error));
        report.push_row(json!({"d": d, "points": g.rows.len(), "max_error": g.max_error,
            "argmax": g.argmax, "bound": bound}));
    }
    let decreasing = errs.windows(2).all(|w| w[1].1 < w[0].1);
    let fit = fit_decay(&errs)?;
    report.metric("bounds_ok", bounds_ok).metric("strictly_decreasing", decreasing);
    report.metric("fit", fit).metric("slope_limit", NEWMAN_SLOPE);
    report.metric("passed", bounds_ok && decreasing && fit.slope <= NEWMAN_SLOPE);
    Ok(())
}

// 9: sign approximant from the Majority algorithm.
fn quantum_sign_check(report: &mut Report) -> Result<()> {
    let eps = 1.0 / 16.0;
    let s = quantum_sign(eps)?;
    let g = error_grid(|z| s.eval(z), sgn, &s.grid(200, 16), |z| s.tag(z))?;
    let assertable = g.rows.iter().filter(|r| r.domain == DomainTag::Assertable).count();
    let sign_ok = s.n == 32 && g.max_error <= eps;
    let inner: Vec<f64> = uniform_grid(-eps, eps, 103)[1..102].to_vec();
    let abs = error_grid(|z| s.abs(z), f64::abs, &inner, |_| DomainTag::Assertable)?;
    let abs_ok = abs.max_error <= 2.0 * eps;
    for r in g.rows.iter().filter(|r| r.domain == DomainTag::ReportOnly) {
        report.push_row(r);
    }
    report.metric("n", s.n).metric("reps", s.params.amplification_reps);
    report.metric("assertable_points", assertable);
    report.metric("sign_max_error", g.max_error).metric("sign_argmax", g.argmax);
    report.metric("report_only_max_error", g.report_only_max_error);
    report.metric("abs_max_error", abs.max_error).metric("abs_argmax", abs.argmax);
    report.metric("passed", sign_ok && abs_ok);
    Ok(())
}

// 10: the exact LP oracle.
fn lp_oracle(report: &mut Report) -> Result<()> {
    let or4 = TruthTable::or(4);
    let tenth = parse_rational("1/10")?;
    let scan = scan_degree(&or4, &tenth, 2, false)?;
    let witness_ok = scan.witness().is_some_and(|w| verify_witness(w, &or4, &tenth).ok);
    let scan_ok = scan.degree == Some(1) && witness_ok;
    report.metric("or4_degree", scan.degree).metric("or4_witness_verified", witness_ok);
    if let Some(w) = scan.witness() {
        report.metric("or4_witness", w.to_json());
    }

    let two_fifths = parse_rational("2/5")?;
    let functions: Vec<TruthTable> = (1..=3usize)
        .flat_map(|n| {
            (1..(1u32 << (1 << n)) - 1).map(move |bits| {
                let values = (0..1usize << n).map(|m| ((bits >> m) & 1) as f64).collect();
                TruthTable::new(n, values).expect("valid table")
            })
        })
        .collect();
    let feasible_at_zero: Vec<bool> = functions
        .par_iter()
        .map(|f| rdeg_feasible(f, 0, &two_fifths, false).map(|r| r.feasible))
        .collect::<postsel::Result<_>>()?;
    let zero_ok = feasible_at_zero.iter().all(|&b| !b);
    report.metric("nonconstant_functions", functions.len());
    report.metric("all_infeasible_at_zero", zero_ok);

    // feasibility must not switch off as the degree grows
    let family = [
        ("or:3", TruthTable::or(3)),
        ("and:3", TruthTable::and(3)),
        ("maj:3", TruthTable::majority(3)),
        ("or:4", TruthTable::or(4)),
    ];
    let mut mono_ok = true;
    for (name, f) in &family {
        let flags: Vec<bool> = (0..=3)
            .map(|d| rdeg_feasible(f, d, &tenth, false).map(|r| r.feasible))
            .collect::<postsel::Result<_>>()?;
        let ok = flags.windows(2).all(|w| !w[0] || w[1]);
        mono_ok &= ok;
        report.push_row(json!({"function": name, "feasible_by_degree": flags, "monotone": ok}));
    }
    report.metric("monotone", mono_ok);
    report.metric("passed", scan_ok && zero_ok && mono_ok);
    Ok(())
}
