//! One function per subcommand. Each returns a report and, where the
//! command produces a grid, a CSV table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use postsel::boolfn::{extract_pq, ratio_check, CoherentAlgorithm, MultilinearPoly, PolyJson, TruthTable};
use postsel::compile::{compile_rational, compile_report, roundtrip};
use postsel::constructions::OrDemo;
use postsel::majority::{majority_exact, majority_sample, MajorityInput, MajorityPlan};
use postsel::newman::{error_grid, fit_decay, newman_abs_grid, quantum_sign, sgn, uniform_grid};
use postsel::rdeg::{parse_rational, rdeg_feasible, scan_degree};
use postsel::replicate;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::report::{Report, Table};

/// Task ids for seed streams, one per experiment family.
pub mod task {
    pub const MAJ_RUN: u64 = 1;
    pub const OR_DEMO: u64 = 2;
    pub const ELIM_A: u64 = 100;
    pub const ELIM_B: u64 = 200;
    pub const MAJORITY: u64 = 300;
}

/// Result of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Report,
    pub table: Option<Table>,
}

impl Output {
    pub fn report(report: Report) -> Self {
        Self { report, table: None }
    }
}

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    };
}

string_enum!(Mode { Sample => "sample", Exact => "exact" });
string_enum!(InputPath { Bits => "bits", Weight => "weight" });
string_enum!(NewmanKind { Classic => "classic", Quantum => "quantum" });
string_enum!(AlgKind { OrDemo => "or-demo", Compiled => "compiled" });

/// Comma-separated list of degrees, e.g. `16,36,64,100`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DegreeList(pub Vec<usize>);

impl FromStr for DegreeList {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(DegreeList)
    }
}

impl fmt::Display for DegreeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

fn precondition(msg: impl Into<String>) -> CliError {
    CliError::Precondition(msg.into())
}

fn fmt_f(v: f64) -> String {
    crate::report::fmt_float(v)
}

/// `1^w 0^(n-w)`.
pub fn bits_of_weight(n: usize, w: usize) -> Vec<bool> {
    (0..n).map(|i| i < w).collect()
}

/// A built-in function `name:N` (`or`, `and`, `maj`, `parity`, `const0`,
/// `const1`, `dictator`) or a truth-table file.
pub fn load_function(spec: &str) -> Result<TruthTable> {
    if let Some((name, n)) = spec.split_once(':') {
        let n: usize = n
            .parse()
            .map_err(|_| CliError::Usage(format!("bad function size in {spec:?}")))?;
        if n == 0 || n > 20 {
            return Err(precondition(format!("function size {n} outside 1..=20")));
        }
        return match name {
            "or" => Ok(TruthTable::or(n)),
            "and" => Ok(TruthTable::and(n)),
            "maj" => Ok(TruthTable::majority(n)),
            "parity" => Ok(TruthTable::symmetric(n, |w| (w % 2) as f64)),
            "const0" => Ok(TruthTable::constant(n, 0.0)),
            "const1" => Ok(TruthTable::constant(n, 1.0)),
            "dictator" => Ok(TruthTable::from_fn(n, |x| x[0] as u8 as f64)),
            _ => Err(CliError::Usage(format!("unknown function {name:?}"))),
        };
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::io(spec, e))?;
    Ok(text.parse()?)
}

/// Reads a polynomial in the `{n, terms: [{subset, coeff}]}` format.
pub fn load_poly(path: &Path) -> Result<MultilinearPoly> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let json: PolyJson<f64> = serde_json::from_str(&text)
        .map_err(|e| precondition(format!("{}: not a polynomial file: {e}", path.display())))?;
    Ok(MultilinearPoly::from_json(&json)?)
}

// ---------------------------------------------------------------------------
// Majority

#[derive(Debug, Clone, PartialEq)]
pub struct MajRunConfig {
    pub n: usize,
    pub eps: f64,
    pub weight: f64,
    pub samples: u64,
    pub mode: Mode,
    pub path: InputPath,
    pub seed: u64,
}

/// Aggregate of sampled Majority runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajStats {
    pub runs: u64,
    pub ones: u64,
    pub max_queries: u64,
    pub total_queries: u64,
}

/// Runs the combined algorithm `runs` times on one input, replica `r`
/// seeded from `(seed, task, r)`.
pub fn majority_monte_carlo(input: MajorityInput<'_>, eps: f64, runs: u64, seed: u64, task: u64) -> Result<MajStats> {
    let results = replicate(runs, seed, task, |rng| majority_sample(input, eps, rng));
    let mut stats = MajStats { runs, ones: 0, max_queries: 0, total_queries: 0 };
    for r in results {
        let r = r?;
        stats.ones += r.output as u64;
        stats.max_queries = stats.max_queries.max(r.queries);
        stats.total_queries += r.queries;
    }
    Ok(stats)
}

pub fn maj_run(cfg: &MajRunConfig, config: BTreeMap<String, Value>) -> Result<Output> {
    let truth = 2.0 * cfg.weight >= cfg.n as f64;
    if !(0.0..=cfg.n as f64).contains(&cfg.weight) {
        return Err(precondition(format!("weight {} outside [0, {}]", cfg.weight, cfg.n)));
    }
    let mut report = Report::new("maj-run", config);
    let guarded = cfg.path == InputPath::Bits;
    let plan = MajorityPlan::new(cfg.n, cfg.eps, guarded)?;
    report.metric("t", plan.t).metric("reps", plan.reps).metric("fallback", plan.fallback);
    report.metric("truth", truth as u8);
    match cfg.mode {
        Mode::Exact => {
            let p = majority_exact(cfg.n, cfg.eps, cfg.weight)?;
            report.metric("prob_output_one", p);
            report.metric("error", if truth { 1.0 - p } else { p });
        }
        Mode::Sample => {
            if cfg.samples == 0 {
                return Err(precondition("samples must be positive"));
            }
            let bits;
            let input = match cfg.path {
                InputPath::Bits => {
                    if cfg.weight.fract() != 0.0 {
                        return Err(precondition("the bit-string path needs an integer weight"));
                    }
                    bits = bits_of_weight(cfg.n, cfg.weight as usize);
                    MajorityInput::Bits(&bits)
                }
                InputPath::Weight => MajorityInput::Weight { n: cfg.n, z: cfg.weight },
            };
            let s = majority_monte_carlo(input, cfg.eps, cfg.samples, cfg.seed, task::MAJ_RUN)?;
            let p1 = s.ones as f64 / s.runs as f64;
            let err = if truth { 1.0 - p1 } else { p1 };
            report.metric("runs", s.runs).metric("ones", s.ones);
            report.metric("empirical_prob_output_one", p1);
            report.metric("empirical_error", err);
            report.metric("sigma", (err * (1.0 - err) / s.runs as f64).sqrt());
            report.metric("max_queries", s.max_queries);
            report.metric("mean_queries", s.total_queries as f64 / s.runs as f64);
        }
    }
    Ok(Output::report(report))
}

pub fn maj_curve(n: usize, eps: f64, points: usize, config: BTreeMap<String, Value>) -> Result<Output> {
    if points < 2 {
        return Err(precondition("points must be at least 2"));
    }
    let zs = uniform_grid(0.0, n as f64, points);
    let vals: Vec<f64> = {
        use rayon::prelude::*;
        zs.par_iter().map(|&z| majority_exact(n, eps, z)).collect::<postsel::Result<_>>()?
    };
    let mut table = Table::new(&["z", "r"]);
    let mut report = Report::new("maj-curve", config);
    let mut worst_integer = 0.0f64;
    for (&z, &r) in zs.iter().zip(&vals) {
        table.push(vec![fmt_f(z), fmt_f(r)]);
        report.push_row(json!({"z": z, "r": r}));
        if z.fract() == 0.0 {
            let truth = if 2.0 * z >= n as f64 { 1.0 } else { 0.0 };
            worst_integer = worst_integer.max((r - truth).abs());
        }
    }
    report.metric("points", points).metric("max_error_integer_weights", worst_integer);
    Ok(Output { report, table: Some(table) })
}

// ---------------------------------------------------------------------------
// OR demo and extraction

pub fn or_demo(n: usize, eps0: f64, samples: u64, seed: u64, config: BTreeMap<String, Value>) -> Result<Output> {
    let demo = OrDemo::new(n, eps0)?;
    let mut report = Report::new("or-demo", config);
    let mut table = Table::new(&["weight", "success_prob", "conditional_error", "prob_output_one", "empirical_output_one"]);
    let (mut max_err, mut min_success) = (0.0f64, f64::INFINITY);
    for w in 0..=n {
        let x = bits_of_weight(n, w);
        let out = demo.exact(&x)?;
        max_err = max_err.max(out.conditional_error);
        min_success = min_success.min(out.success_prob);
        let empirical = if samples > 0 {
            let draws = replicate(samples, seed, task::OR_DEMO * 1000 + w as u64, |rng| demo.sample(&x, rng));
            let mut ones = 0u64;
            for d in draws {
                ones += d?.0 as u64;
            }
            Some(ones as f64 / samples as f64)
        } else {
            None
        };
        table.push(vec![
            w.to_string(),
            fmt_f(out.success_prob),
            fmt_f(out.conditional_error),
            fmt_f(out.prob_output_one),
            empirical.map(fmt_f).unwrap_or_default(),
        ]);
        report.push_row(json!({
            "weight": w,
            "success_prob": out.success_prob,
            "conditional_error": out.conditional_error,
            "prob_output_one": out.prob_output_one,
            "empirical_output_one": empirical,
        }));
    }
    report.metric("max_conditional_error", max_err).metric("min_success_prob", min_success);
    Ok(Output { report, table: Some(table) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub alg: AlgKind,
    pub n: usize,
    pub eps0: f64,
    pub p: Option<std::path::PathBuf>,
    pub q: Option<std::path::PathBuf>,
    pub f: Option<String>,
    pub eps: Option<f64>,
}

pub fn extract(cfg: &ExtractConfig, config: BTreeMap<String, Value>) -> Result<Output> {
    let alg: Box<dyn CoherentAlgorithm> = match cfg.alg {
        AlgKind::OrDemo => Box::new(OrDemo::new(cfg.n, cfg.eps0)?),
        AlgKind::Compiled => {
            let (p, q) = match (&cfg.p, &cfg.q) {
                (Some(p), Some(q)) => (load_poly(p)?, load_poly(q)?),
                _ => return Err(CliError::Usage("--alg compiled needs --p and --q".into())),
            };
            Box::new(compile_rational(&p, &q)?)
        }
    };
    let pair = extract_pq(alg.as_ref())?;
    let mut report = Report::new("extract", config);
    report.metric("queries", pair.queries);
    report.metric("deg_p", pair.p.degree()).metric("deg_q", pair.q.degree());
    report.metric("p", pair.p.to_json()).metric("q", pair.q.to_json());
    if let Some(spec) = &cfg.f {
        let f = load_function(spec)?;
        let eps = cfg.eps.ok_or_else(|| CliError::Usage("--f needs --eps".into()))?;
        report.metric("ratio_check", ratio_check(&pair.p, &pair.q, &f, eps)?);
    }
    Ok(Output::report(report))
}

// ---------------------------------------------------------------------------
// Compiler

pub fn compile(p: &Path, q: &Path, f: &str, config: BTreeMap<String, Value>) -> Result<Output> {
    let (p, q, f) = (load_poly(p)?, load_poly(q)?, load_function(f)?);
    let alg = compile_rational(&p, &q)?;
    let rep = compile_report(&alg, &f)?;
    let mut report = Report::new("compile", config);
    let gap = rep
        .rows
        .iter()
        .map(|r| (r.conditional_error - r.predicted_error).abs())
        .fold(0.0, f64::max);
    report.metric("degree", alg.degree());
    report.metric("queries_charged", rep.queries_charged);
    report.metric("max_error", rep.max_error);
    report.metric("max_formula_gap", gap);
    let mut table = Table::new(&["x", "f", "success_prob", "conditional_error", "predicted_error", "ratio", "queries"]);
    for r in &rep.rows {
        table.push(vec![
            r.x.clone(),
            r.f.to_string(),
            fmt_f(r.success_prob),
            fmt_f(r.conditional_error),
            fmt_f(r.predicted_error),
            fmt_f(r.ratio),
            r.queries.to_string(),
        ]);
        report.push_row(r);
    }
    Ok(Output { report, table: Some(table) })
}

pub fn roundtrip_cmd(p: &Path, q: &Path, f: &str, eps: f64, config: BTreeMap<String, Value>) -> Result<Output> {
    let (p, q, f) = (load_poly(p)?, load_poly(q)?, load_function(f)?);
    let rep = roundtrip(&f, &p, &q, eps);
    let mut report = Report::new("roundtrip", config);
    report.metric("passed", rep.passed).metric("result", &rep);
    Ok(Output::report(report))
}

// ---------------------------------------------------------------------------
// Newman

pub fn newman_classic(degrees: &[usize], points: usize, config: BTreeMap<String, Value>) -> Result<Output> {
    if degrees.is_empty() {
        return Err(precondition("no degrees given"));
    }
    let mut report = Report::new("newman-classic", config);
    let mut fit_points = Vec::new();
    let mut table = Table::new(&["d", "max_error", "argmax", "bound"]);
    let mut single = None;
    for &d in degrees {
        let grid = newman_abs_grid(d, points)?;
        let bound = (-0.5 * (d as f64).sqrt()).exp();
        report.push_row(json!({"d": d, "max_error": grid.max_error, "argmax": grid.argmax, "bound": bound}));
        table.push(vec![d.to_string(), fmt_f(grid.max_error), fmt_f(grid.argmax), fmt_f(bound)]);
        fit_points.push((d, grid.max_error));
        single = Some(grid);
    }
    if degrees.len() >= 3 {
        report.metric("fit", fit_decay(&fit_points)?);
    }
    // a single degree gets its full grid as CSV
    let table = match (degrees.len(), single) {
        (1, Some(grid)) => {
            let mut t = Table::new(&["z", "value", "reference", "abs_error", "domain_tag"]);
            for r in &grid.rows {
                t.push(vec![fmt_f(r.z), fmt_f(r.value), fmt_f(r.reference), fmt_f(r.abs_error), r.domain.as_str().into()]);
            }
            report.metric("max_error", grid.max_error).metric("argmax", grid.argmax);
            t
        }
        _ => table,
    };
    Ok(Output { report, table: Some(table) })
}

pub fn newman_quantum(eps: f64, points: usize, extra: usize, config: BTreeMap<String, Value>) -> Result<Output> {
    let s = quantum_sign(eps)?;
    let grid = error_grid(|z| s.eval(z), sgn, &s.grid(points, extra), |z| s.tag(z))?;
    let mut report = Report::new("newman-quantum", config);
    report.metric("n", s.n).metric("reps", s.params.amplification_reps);
    report.metric("max_error", grid.max_error).metric("argmax", grid.argmax);
    report.metric("report_only_max_error", grid.report_only_max_error);
    let mut table = Table::new(&["z", "value", "reference", "abs_error", "domain_tag"]);
    for r in &grid.rows {
        table.push(vec![fmt_f(r.z), fmt_f(r.value), fmt_f(r.reference), fmt_f(r.abs_error), r.domain.as_str().into()]);
        report.push_row(r);
    }
    Ok(Output { report, table: Some(table) })
}

// ---------------------------------------------------------------------------
// Rational degree

#[derive(Debug, Clone, PartialEq)]
pub struct RdegConfig {
    pub f: String,
    pub eps: String,
    pub degree: Option<usize>,
    pub scan: Option<usize>,
    pub symmetric: bool,
}

pub fn rdeg(cfg: &RdegConfig, config: BTreeMap<String, Value>) -> Result<Output> {
    let f = load_function(&cfg.f)?;
    let eps = parse_rational(&cfg.eps)?;
    let mut report = Report::new("rdeg", config);
    match (cfg.degree, cfg.scan) {
        (Some(d), None) => {
            let r = rdeg_feasible(&f, d, &eps, cfg.symmetric)?;
            report.metric("feasible", r.feasible).metric("result", r.to_json());
        }
        (None, Some(d_max)) => {
            let scan = scan_degree(&f, &eps, d_max, cfg.symmetric)?;
            report.metric("degree", scan.degree);
            for r in &scan.attempts {
                report.push_row(r.to_json());
            }
        }
        _ => return Err(CliError::Usage("give exactly one of --degree and --scan".into())),
    }
    Ok(Output::report(report))
}
