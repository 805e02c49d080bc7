//! Compiling a rational approximation `P/Q` of a Boolean function into a
//! postselection algorithm with `d = max(deg P, deg Q)` queries.
//!
//! With `R = Q - 2P` the algorithm prepares
//! `|0> sum_S Q^(S) |S> + |1> sum_S R^(S) |S>` (normalized), applies the
//! subset-phase query, Hadamards the subset register and postselects it on
//! `0^N`. What is left is proportional to `Q(x)|0> + R(x)|1>`; a final
//! Hadamard on the first qubit gives output `b = 1` with probability
//! `(1 - r)^2 / (2 (1 + r^2))` where `r = R(x)/Q(x)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::boolfn::{
    extract_pq, fourier, ratio_check, CoherentAlgorithm, FourierSpectrum, MultilinearPoly,
    RatioCheck, TruthTable,
};
use crate::error::{Error, Result};
use crate::qsim::{mask_to_bits, PureState, QueryCounter, Register};

/// Fourier mass allowed above the declared degree.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Allowed gap between simulated and analytic conditional error.
pub const FORMULA_TOL: f64 = 1e-10;

/// Error probability of the compiled algorithm on an input where
/// `R(x)/Q(x) = ratio` and `F(x) = 1 - 2 f(x) = f_sign`.
pub fn error_formula(ratio: f64, f_sign: i8) -> f64 {
    let num = if f_sign >= 0 { 1.0 - ratio } else { 1.0 + ratio };
    num * num / (2.0 * (1.0 + ratio * ratio))
}

/// A compiled postselection algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledAlgorithm {
    n: usize,
    degree: usize,
    spec_q: FourierSpectrum,
    spec_r: FourierSpectrum,
    q_values: Vec<f64>,
    r_values: Vec<f64>,
    recipe: PureState,
}

impl CompiledAlgorithm {
    /// Builds the algorithm from the spectra of `Q` and `R`.
    pub fn from_spectra(degree: usize, spec_q: FourierSpectrum, spec_r: FourierSpectrum) -> Result<Self> {
        let n = spec_q.n();
        if spec_r.n() != n {
            return Err(Error::domain("Q and R spectra disagree on N"));
        }
        if n + 1 > crate::qsim::MAX_QUBITS {
            return Err(Error::capacity(format!("N = {n} needs {} qubits", n + 1)));
        }
        for (name, s) in [("Q", &spec_q), ("R", &spec_r)] {
            let over = s.max_beyond(degree);
            if over > SPECTRAL_TOL {
                return Err(Error::DegreeOverflow(format!(
                    "{name} has Fourier weight {over:e} above degree {degree}"
                )));
            }
        }
        let q_values = crate::boolfn::inverse_fourier(&spec_q).values().to_vec();
        let r_values = crate::boolfn::inverse_fourier(&spec_r).values().to_vec();
        if let Some(x) = q_values.iter().position(|v| v.abs() < crate::boolfn::COEFF_ZERO) {
            return Err(Error::domain(format!("Q vanishes at x = {x:#b}")));
        }
        let size = 1usize << n;
        let mut amps = vec![0.0; 2 * size];
        for s in 0..size {
            // coefficients above the degree are below tolerance; drop them
            if s.count_ones() as usize <= degree {
                amps[s] = spec_q.coeff(s);
                amps[size + s] = spec_r.coeff(s);
            }
        }
        let recipe = PureState::from_unnormalized(n + 1, amps)?;
        Ok(Self { n, degree, spec_q, spec_r, q_values, r_values, recipe })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spec_q(&self) -> &FourierSpectrum {
        &self.spec_q
    }

    pub fn spec_r(&self) -> &FourierSpectrum {
        &self.spec_r
    }

    /// Normalized state before the query.
    pub fn recipe(&self) -> &PureState {
        &self.recipe
    }

    /// `R(x)/Q(x)` at bitmask `x`.
    pub fn ratio(&self, x: usize) -> f64 {
        self.r_values[x] / self.q_values[x]
    }

    fn subsets(&self) -> Register {
        Register::new(1, self.n)
    }
}

impl CoherentAlgorithm for CompiledAlgorithm {
    fn num_inputs(&self) -> usize {
        self.n
    }

    fn query_count(&self) -> usize {
        self.degree
    }

    fn run(&self, x: &[bool], counter: &mut QueryCounter) -> Result<PureState> {
        let mut s = self.recipe.clone();
        s.apply_subset_phase_query(x, self.subsets(), self.degree, counter)?;
        s.hadamard_register(self.subsets())?;
        s.hadamard(0)?;
        Ok(s)
    }

    fn accepts(&self, index: usize) -> bool {
        index & ((1 << self.n) - 1) == 0
    }

    fn output(&self, index: usize) -> bool {
        index >> self.n == 1
    }
}

/// Compiles `P/Q` with `d = max(deg P, deg Q)`.
pub fn compile_rational(p: &MultilinearPoly, q: &MultilinearPoly) -> Result<CompiledAlgorithm> {
    if p.n() != q.n() {
        return Err(Error::domain("P and Q must share N"));
    }
    let q_tt = q.to_truth_table();
    if let Some(x) = q_tt.values().iter().position(|v| v.abs() < crate::boolfn::COEFF_ZERO) {
        return Err(Error::domain(format!("Q vanishes at x = {x:#b}")));
    }
    let r = q.add_scaled(p, -2.0)?;
    let degree = p.degree().max(q.degree());
    CompiledAlgorithm::from_spectra(degree, fourier(&q_tt), fourier(&r.to_truth_table()))
}

/// One input of a compile report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileRow {
    /// Input as a bit string, `x_1` first.
    pub x: String,
    pub f: u8,
    pub success_prob: f64,
    pub prob_output_one: f64,
    pub conditional_error: f64,
    pub predicted_error: f64,
    pub ratio: f64,
    pub queries: u64,
}

/// Runs the compiled algorithm on `x` step by step and checks the outcome
/// statistics against [`error_formula`].
pub fn run_compiled(alg: &CompiledAlgorithm, x: usize, f_x: bool) -> Result<CompileRow> {
    let bits = mask_to_bits(x, alg.n);
    let mut counter = QueryCounter::new();
    let mut s = alg.recipe.clone();
    s.apply_subset_phase_query(&bits, alg.subsets(), alg.degree, &mut counter)?;
    s.hadamard_register(alg.subsets())?;
    let success_prob = s.postselect_register(alg.subsets(), 0)?;
    s.hadamard(0)?;
    let prob_output_one = s.distribution(Register::single(0))?.prob(1);
    let conditional_error = if f_x { 1.0 - prob_output_one } else { prob_output_one };
    let ratio = alg.ratio(x);
    let predicted_error = error_formula(ratio, if f_x { -1 } else { 1 });
    if (conditional_error - predicted_error).abs() > FORMULA_TOL {
        return Err(Error::TheoremViolation(format!(
            "simulated error {conditional_error:e} differs from formula {predicted_error:e} at x = {x:#b}"
        )));
    }
    Ok(CompileRow {
        x: bits.iter().map(|&b| if b { '1' } else { '0' }).collect(),
        f: f_x as u8,
        success_prob,
        prob_output_one,
        conditional_error,
        predicted_error,
        ratio,
        queries: counter.count(),
    })
}

/// All-inputs report for a compiled algorithm against target `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub rows: Vec<CompileRow>,
    pub queries_charged: u64,
    pub max_error: f64,
}

pub fn compile_report(alg: &CompiledAlgorithm, f: &TruthTable) -> Result<CompileReport> {
    if f.n() != alg.n {
        return Err(Error::domain("f and the compiled algorithm must share N"));
    }
    if !f.is_boolean() {
        return Err(Error::domain("target function must be Boolean"));
    }
    let rows: Vec<CompileRow> = (0..1usize << alg.n)
        .into_par_iter()
        .map(|x| run_compiled(alg, x, f.value(x) == 1.0))
        .collect::<Result<_>>()?;
    let max_error = rows.iter().map(|r| r.conditional_error).fold(0.0, f64::max);
    Ok(CompileReport { rows, queries_charged: alg.degree as u64, max_error })
}

/// Pipeline stage of a [`roundtrip`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Pre,
    Compile,
    Run,
    Extract,
    Check,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Pre => "pre",
            Stage::Compile => "compile",
            Stage::Run => "run",
            Stage::Extract => "extract",
            Stage::Check => "check",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub passed: bool,
    /// First stage that failed, if any.
    pub failed_stage: Option<Stage>,
    pub message: Option<String>,
    pub input_check: Option<RatioCheck>,
    pub degree: Option<usize>,
    pub max_compiled_error: Option<f64>,
    pub extracted_degree: Option<usize>,
    pub extracted_check: Option<RatioCheck>,
}

impl RoundtripReport {
    fn empty() -> Self {
        Self {
            passed: false,
            failed_stage: None,
            message: None,
            input_check: None,
            degree: None,
            max_compiled_error: None,
            extracted_degree: None,
            extracted_check: None,
        }
    }

    fn fail(mut self, stage: Stage, message: impl Into<String>) -> Self {
        self.failed_stage = Some(stage);
        self.message = Some(message.into());
        self
    }
}

/// Checks `P/Q` against `f`, compiles it, runs it on every input, extracts
/// the acceptance polynomials of the compiled algorithm and checks those
/// against `f` again. Failures are reported with the stage they occurred in.
pub fn roundtrip(f: &TruthTable, p: &MultilinearPoly, q: &MultilinearPoly, eps: f64) -> RoundtripReport {
    let mut rep = RoundtripReport::empty();
    match ratio_check(p, q, f, eps) {
        Ok(c) if c.ok => rep.input_check = Some(c),
        Ok(c) => {
            rep.input_check = Some(c);
            return rep.fail(
                Stage::Pre,
                format!("P/Q deviates by {:e} at x = {:#b}", c.max_deviation, c.argmax),
            );
        }
        Err(e) => return rep.fail(Stage::Pre, e.to_string()),
    }
    let alg = match compile_rational(p, q) {
        Ok(a) => a,
        Err(e) => return rep.fail(Stage::Compile, e.to_string()),
    };
    rep.degree = Some(alg.degree());
    match compile_report(&alg, f) {
        Ok(r) => {
            rep.max_compiled_error = Some(r.max_error);
            if r.max_error > eps + crate::boolfn::RATIO_SLACK {
                return rep.fail(Stage::Run, format!("compiled error {:e} exceeds eps", r.max_error));
            }
        }
        Err(e) => return rep.fail(Stage::Run, e.to_string()),
    }
    let pair = match extract_pq(&alg) {
        Ok(pair) => pair,
        Err(e) => return rep.fail(Stage::Extract, e.to_string()),
    };
    let ext_deg = pair.p.degree().max(pair.q.degree());
    rep.extracted_degree = Some(ext_deg);
    if ext_deg > 2 * alg.degree() {
        return rep.fail(Stage::Extract, format!("extracted degree {ext_deg} exceeds 2d"));
    }
    match ratio_check(&pair.p, &pair.q, f, eps) {
        Ok(c) => {
            rep.extracted_check = Some(c);
            if !c.ok {
                return rep.fail(Stage::Check, format!("extracted pair deviates by {:e}", c.max_deviation));
            }
        }
        Err(e) => return rep.fail(Stage::Check, e.to_string()),
    }
    rep.passed = true;
    rep
}
