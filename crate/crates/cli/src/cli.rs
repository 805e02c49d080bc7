//! Command-line surface. Every parameter is optional here so that a config
//! file can supply it; resolution happens in [`crate::dispatch`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::experiments::{AlgKind, DegreeList, InputPath, Mode, NewmanKind};

#[derive(Debug, Parser)]
#[command(name = "postsel", version, about = "Postselected query algorithm experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed (falls back to the config file, then POSTSEL_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default 1).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Line-based key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the CSV table here, for commands that produce one.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Majority algorithm at one weight, sampled or exact.
    MajRun {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        weight: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        path: Option<InputPath>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact output-1 probability of the Majority algorithm over a weight grid.
    MajCurve {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// The one-query postselected OR algorithm on every weight.
    OrDemo {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps0: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Extract the acceptance polynomials of an algorithm.
    Extract {
        #[arg(long)]
        alg: Option<AlgKind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps0: Option<f64>,
        /// Numerator polynomial file (for --alg compiled).
        #[arg(long)]
        p: Option<PathBuf>,
        /// Denominator polynomial file (for --alg compiled).
        #[arg(long)]
        q: Option<PathBuf>,
        /// Function to check P/Q against: `or:4`, `maj:3`, ... or a truth-table file.
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compile P/Q into a postselection algorithm and run it on every input.
    Compile {
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long)]
        f: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check, compile, run, extract and check again.
    Roundtrip {
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Rational approximations of |x| and sgn.
    Newman {
        #[arg(long)]
        kind: Option<NewmanKind>,
        /// Comma-separated degrees (classic).
        #[arg(long)]
        degrees: Option<DegreeList>,
        #[arg(long)]
        points: Option<usize>,
        /// Target error (quantum).
        #[arg(long)]
        eps: Option<f64>,
        /// Report-only points left of the assertable domain (quantum).
        #[arg(long)]
        extra: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact LP feasibility of rational approximation at a degree.
    Rdeg {
        #[arg(long)]
        f: Option<String>,
        /// Error as an exact fraction, e.g. `1/10`.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        degree: Option<usize>,
        /// Scan degrees 0..=D and stop at the first feasible one.
        #[arg(long)]
        scan: Option<usize>,
        #[arg(long)]
        symmetric: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run acceptance criteria and aggregate their verdicts.
    Report {
        /// Criterion 1 to 11.
        #[arg(long, conflicts_with = "all")]
        criterion: Option<u32>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::MajRun { common, .. }
            | Command::MajCurve { common, .. }
            | Command::OrDemo { common, .. }
            | Command::Extract { common, .. }
            | Command::Compile { common, .. }
            | Command::Roundtrip { common, .. }
            | Command::Newman { common, .. }
            | Command::Rdeg { common, .. }
            | Command::Report { common, .. } => common,
        }
    }
}
