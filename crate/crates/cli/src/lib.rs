//! Batch experiment runner for the `postsel` crate.
//!
//! [`run`] parses arguments, resolves parameters (flag, then config file,
//! then default), runs one experiment on a pool of `--threads` workers and
//! writes a JSON report plus an optional CSV table. Reports contain no
//! timing, thread count or output paths, so reruns with the same seed are
//! byte-identical.

pub mod cli;
pub mod config;
pub mod criteria;
pub mod error;
pub mod experiments;
pub mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use crate::cli::{Cli, Command};
use crate::config::{Outputs, Resolver};
use crate::error::{CliError, Result};
use crate::experiments::{
    AlgKind, DegreeList, ExtractConfig, InputPath, MajRunConfig, Mode, NewmanKind, Output, RdegConfig,
};
use crate::report::{write_text, Report};

pub use crate::error::CliError as Error;

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let start = Instant::now();
    let result = execute(&cli.command);
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command) -> Result<()> {
    let common = command.common();
    let mut r = Resolver::new(common.config.as_deref())?;
    let outputs = Outputs {
        out: r.setting("out", common.out.clone())?,
        csv: r.setting("csv", common.csv.clone())?,
        threads: r.setting("threads", common.threads)?.unwrap_or(1),
    };
    if outputs.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(outputs.threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let output = pool.install(|| dispatch(command, r))?;
    write_text(outputs.out.as_deref(), &output.report.to_json())?;
    match (&outputs.csv, &output.table) {
        (Some(path), Some(table)) => write_text(Some(path), &table.to_csv())?,
        (Some(_), None) => return Err(CliError::Usage("this command has no CSV output".into())),
        _ => {}
    }
    Ok(())
}

/// Resolves the parameters of `command` and runs it on the current pool.
pub fn dispatch(command: &Command, mut r: Resolver) -> Result<Output> {
    let common = command.common();
    match command {
        Command::MajRun { n, eps, weight, samples, mode, path, .. } => {
            let cfg = MajRunConfig {
                n: r.required("n", *n)?,
                eps: r.required("eps", *eps)?,
                weight: r.required("weight", *weight)?,
                samples: r.value("samples", *samples, 10_000)?,
                mode: r.value("mode", *mode, Mode::Sample)?,
                path: r.value("path", *path, InputPath::Bits)?,
                seed: r.seed(common.seed)?,
            };
            experiments::maj_run(&cfg, r.finish()?)
        }
        Command::MajCurve { n, eps, points, .. } => {
            let n = r.required("n", *n)?;
            let eps = r.required("eps", *eps)?;
            let points = r.value("points", *points, 129)?;
            experiments::maj_curve(n, eps, points, r.finish()?)
        }
        Command::OrDemo { n, eps0, samples, .. } => {
            let n = r.required("n", *n)?;
            let eps0 = r.value("eps0", *eps0, 0.1)?;
            let samples = r.value("samples", *samples, 0)?;
            let seed = r.seed(common.seed)?;
            experiments::or_demo(n, eps0, samples, seed, r.finish()?)
        }
        Command::Extract { alg, n, eps0, p, q, f, eps, .. } => {
            let alg = r.value("alg", *alg, AlgKind::OrDemo)?;
            let cfg = ExtractConfig {
                alg,
                n: if alg == AlgKind::OrDemo { r.required("n", *n)? } else { 0 },
                eps0: if alg == AlgKind::OrDemo { r.value("eps0", *eps0, 0.1)? } else { 0.0 },
                p: path_param(&mut r, "p", p)?,
                q: path_param(&mut r, "q", q)?,
                f: r.optional("f", f.clone())?,
                eps: r.optional("eps", *eps)?,
            };
            experiments::extract(&cfg, r.finish()?)
        }
        Command::Compile { p, q, f, .. } => {
            let p = required_path(&mut r, "p", p)?;
            let q = required_path(&mut r, "q", q)?;
            let f: String = r.required("f", f.clone())?;
            experiments::compile(&p, &q, &f, r.finish()?)
        }
        Command::Roundtrip { p, q, f, eps, .. } => {
            let p = required_path(&mut r, "p", p)?;
            let q = required_path(&mut r, "q", q)?;
            let f: String = r.required("f", f.clone())?;
            let eps = r.required("eps", *eps)?;
            experiments::roundtrip_cmd(&p, &q, &f, eps, r.finish()?)
        }
        Command::Newman { kind, degrees, points, eps, extra, .. } => {
            match r.value("kind", *kind, NewmanKind::Classic)? {
                NewmanKind::Classic => {
                    let degrees = r.value("degrees", degrees.clone(), DegreeList(vec![16, 36, 64, 100]))?;
                    let points = r.value("points", *points, 10_000)?;
                    experiments::newman_classic(&degrees.0, points, r.finish()?)
                }
                NewmanKind::Quantum => {
                    let eps = r.value("eps", *eps, 1.0 / 16.0)?;
                    let points = r.value("points", *points, 200)?;
                    let extra = r.value("extra", *extra, 16)?;
                    experiments::newman_quantum(eps, points, extra, r.finish()?)
                }
            }
        }
        Command::Rdeg { f, eps, degree, scan, symmetric, .. } => {
            let cfg = RdegConfig {
                f: r.required("f", f.clone())?,
                eps: r.required("eps", eps.clone())?,
                degree: r.optional("degree", *degree)?,
                scan: r.optional("scan", *scan)?,
                symmetric: r.value("symmetric", symmetric.then_some(true), false)?,
            };
            experiments::rdeg(&cfg, r.finish()?)
        }
        Command::Report { criterion, all, .. } => {
            let criterion = r.optional("criterion", *criterion)?;
            let all = r.value("all", all.then_some(true), false)?;
            let seed = r.seed(common.seed)?;
            let config = r.finish()?;
            match (criterion, all) {
                (Some(k), false) if criteria::CRITERIA.contains(&k) => {
                    Ok(Output::report(criteria::run_criterion(k, seed)?))
                }
                (Some(11), false) => Ok(Output::report(reproducibility(seed, config)?.0)),
                (None, true) => {
                    let (mut summary, reports) = reproducibility(seed, config)?;
                    summary.experiment = "report-all".into();
                    summary.rows = None;
                    let mut passed = summary.passed().unwrap_or(false);
                    for rep in reports {
                        passed &= rep.passed().unwrap_or(false);
                        summary.metric(&rep.experiment, rep.passed());
                        summary.push_row(&rep);
                    }
                    summary.metric("criterion-11", summary.passed());
                    summary.metric("passed", passed);
                    Ok(Output::report(summary))
                }
                (Some(k), false) => Err(CliError::Usage(format!("criterion {k} outside 1..=11"))),
                _ => Err(CliError::Usage("give --criterion K or --all".into())),
            }
        }
    }
}

fn path_param(r: &mut Resolver, key: &str, flag: &Option<std::path::PathBuf>) -> Result<Option<std::path::PathBuf>> {
    let v: Option<String> = r.optional(key, flag.as_ref().map(|p| p.display().to_string()))?;
    Ok(v.map(Into::into))
}

fn required_path(r: &mut Resolver, key: &str, flag: &Option<std::path::PathBuf>) -> Result<std::path::PathBuf> {
    path_param(r, key, flag)?.ok_or_else(|| CliError::Usage(format!("missing --{key}")))
}

/// Runs criteria 1 to 10 on pools of 1 and 8 threads and compares the
/// serialized reports byte for byte. Returns the verdict and the
/// single-thread reports.
pub fn reproducibility(seed: u64, config: std::collections::BTreeMap<String, Value>) -> Result<(Report, Vec<Report>)> {
    let run_all = |threads: usize| -> Result<Vec<Report>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
        pool.install(|| criteria::CRITERIA.map(|k| criteria::run_criterion(k, seed)).collect())
    };
    let single = run_all(1)?;
    let multi = run_all(8)?;
    let mut report = Report::new("criterion-11", config);
    let mut passed = true;
    for (a, b) in single.iter().zip(&multi) {
        let same = a.to_json() == b.to_json();
        passed &= same;
        report.push_row(serde_json::json!({"experiment": a.experiment, "identical": same, "bytes": a.to_json().len()}));
    }
    report.metric("thread_counts", [1, 8]).metric("passed", passed);
    Ok((report, single))
}
