//! Single-qubit states produced with one query and postselection.
//!
//! [`aaronson_qubit`] is the closed form of the qubit
//! `c (alpha |x| |0> + beta (N - 2|x|)/sqrt2 |1>)`, and
//! [`aaronson_qubit_circuit`] builds the same qubit by simulating the
//! Hadamard/query/postselect circuit gate by gate. [`OrDemo`] is the
//! one-query postselected OR algorithm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boolfn::CoherentAlgorithm;
use crate::error::{Error, Result};
use crate::qsim::{
    ceil_log2, Addressing, Gate, PureState, QueryCounter, Register,
};

const UNIT_TOL: f64 = 1e-10;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A real single-qubit state `amp0 |0> + amp1 |1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub amp0: f64,
    pub amp1: f64,
}

impl QubitState {
    pub fn new(amp0: f64, amp1: f64) -> Result<Self> {
        let norm_sq = amp0 * amp0 + amp1 * amp1;
        if (norm_sq - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!("qubit has squared norm {norm_sq}")));
        }
        Ok(Self { amp0, amp1 })
    }

    pub fn from_unnormalized(amp0: f64, amp1: f64) -> Result<Self> {
        let norm = amp0.hypot(amp1);
        if !(norm > 0.0) {
            return Err(Error::domain("zero qubit vector"));
        }
        Ok(Self { amp0: amp0 / norm, amp1: amp1 / norm })
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { amp0: h, amp1: h }
    }

    /// Same ray with the first nonzero amplitude made positive.
    pub fn canonical_sign(self) -> Self {
        let lead = if self.amp0 != 0.0 { self.amp0 } else { self.amp1 };
        if lead < 0.0 {
            Self { amp0: -self.amp0, amp1: -self.amp1 }
        } else {
            self
        }
    }

    /// `|<+|q>|^2`, the probability of outcome `+` in the `+/-` basis.
    pub fn plus_overlap_sq(&self) -> f64 {
        let s = self.amp0 + self.amp1;
        s * s / 2.0
    }

    pub fn max_abs_diff(&self, other: &QubitState) -> f64 {
        (self.amp0 - other.amp0).abs().max((self.amp1 - other.amp1).abs())
    }
}

/// Amplitudes `(alpha, beta)` of the ancilla, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ABPair {
    alpha: f64,
    beta: f64,
}

impl ABPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::domain(format!(
                "alpha and beta must be positive, got ({alpha}, {beta})"
            )));
        }
        if (alpha * alpha + beta * beta - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain("alpha^2 + beta^2 must equal 1"));
        }
        Ok(Self { alpha, beta })
    }

    /// The pair with `alpha / beta = ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::domain(format!("ratio {ratio} must be positive and finite")));
        }
        let norm = (1.0 + ratio * ratio).sqrt();
        Self::new(ratio / norm, 1.0 / norm)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ratio(&self) -> f64 {
        self.alpha / self.beta
    }
}

/// `count` pairs at evenly spaced angles strictly inside `(0, pi/2)`.
pub fn ab_angle_grid(count: usize) -> Vec<ABPair> {
    (0..count)
        .map(|k| {
            let theta = (k as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / count as f64;
            ABPair::new(theta.cos(), theta.sin()).expect("angle strictly inside the quadrant")
        })
        .collect()
}

/// Closed-form qubit for Hamming weight `z` (real weights allowed).
pub fn aaronson_qubit(n: usize, z: f64, ab: ABPair) -> Result<QubitState> {
    let nf = n as f64;
    if n == 0 || !(0.0..=nf).contains(&z) {
        return Err(Error::domain(format!("weight {z} outside [0, {n}]")));
    }
    let a0 = ab.alpha * z;
    let a1 = ab.beta * (nf - 2.0 * z) / SQRT2;
    // alpha^2 z^2 + (beta^2/2)(N - 2z)^2 > 0: the terms cannot vanish together.
    QubitState::from_unnormalized(a0, a1)
}

/// Result of simulating the one-query circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitQubit {
    /// Output qubit, sign-normalized.
    pub qubit: QubitState,
    /// Target qubit after the first postselection, proportional to `(N - s, s)`.
    pub intermediate: QubitState,
    /// Product of the two postselection success probabilities.
    pub postselect_prob: f64,
}

/// Simulates the circuit for `N = x.len()` a power of two, `N >= 2`.
///
/// Layout: qubit 0 is the ancilla, qubits `1..=n` the index register and
/// qubit `n + 1` the query target.
pub fn aaronson_qubit_circuit(
    x: &[bool],
    ab: ABPair,
    counter: &mut QueryCounter,
) -> Result<CircuitQubit> {
    let big_n = x.len();
    if big_n < 2 || !big_n.is_power_of_two() {
        return Err(Error::domain(format!("N = {big_n} must be a power of two >= 2")));
    }
    let n = big_n.trailing_zeros() as usize;
    let total = n + 2;
    let index = Register::new(1, n);
    let target = n + 1;

    let mut state = PureState::basis(total, 0)?;
    state.hadamard_register(index)?;
    state.apply_bit_query(x, index, Addressing::ZeroBased, target, counter)?;
    state.hadamard_register(index)?;
    let p_index = state.postselect_register(index, 0)?;
    let intermediate = QubitState::new(state.amplitude(0), state.amplitude(1))?;

    state.apply_gate(0, Gate::preparing(ab.alpha, ab.beta), None)?;
    state.apply_gate(target, Gate::hadamard(), Some(0))?;
    let p_target = state.postselect_register(Register::single(target), 1)?;
    assert!(p_index * p_target > 0.0, "both postselections succeeded");

    // ancilla 0/1, index 0, target 1
    let low = 1usize;
    let high = (1usize << (total - 1)) | 1;
    let qubit = QubitState::new(state.amplitude(low), state.amplitude(high))?.canonical_sign();
    Ok(CircuitQubit {
        qubit,
        intermediate,
        postselect_prob: p_index * p_target,
    })
}

/// The one-query postselected OR algorithm.
///
/// A register of `ceil(log2(N+1))` qubits holds an index `0..=N`, value 0
/// being the `eps0` branch; the last qubit is the query target. The state
/// `eps0 |0>|1> + sqrt((1-eps0^2)/N) sum_i |i>|0>` is queried once, then
/// postselected on the target being 1. Output `b = 1` iff the register holds
/// a value `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrDemo {
    n: usize,
    eps0: f64,
}

/// Exact statistics of one OR-demo execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrDemoOutcome {
    pub success_prob: f64,
    pub conditional_error: f64,
    pub prob_output_one: f64,
}

impl OrDemo {
    pub fn new(n: usize, eps0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("OR demo needs at least one input bit"));
        }
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::domain(format!("eps0 = {eps0} outside (0, 1)")));
        }
        Ok(Self { n, eps0 })
    }

    fn register_width(&self) -> usize {
        ceil_log2(self.n + 1)
    }

    fn index_register(&self) -> Register {
        Register::new(0, self.register_width())
    }

    fn target(&self) -> usize {
        self.register_width()
    }

    fn initial_state(&self) -> Result<PureState> {
        let w = self.register_width();
        let mut amps = vec![0.0; 1usize << (w + 1)];
        amps[1] = self.eps0; // |0>|1>
        let spread = ((1.0 - self.eps0 * self.eps0) / self.n as f64).sqrt();
        for i in 1..=self.n {
            amps[i << 1] = spread; // |i>|0>
        }
        PureState::from_unnormalized(w + 1, amps)
    }

    /// Exact statistics for input `x`.
    pub fn exact(&self, x: &[bool]) -> Result<OrDemoOutcome> {
        let mut state = self.run(x, &mut QueryCounter::new())?;
        let success_prob = state.postselect_register(Register::single(self.target()), 1)?;
        let dist = state.distribution(self.index_register())?;
        let prob_output_one = 1.0 - dist.prob(0);
        let or = x.iter().any(|&b| b);
        let conditional_error = if or { 1.0 - prob_output_one } else { prob_output_one };
        Ok(OrDemoOutcome { success_prob, conditional_error, prob_output_one })
    }

    /// Runs the algorithm once, conditioned on postselection success, and
    /// returns the measured output bit alongside the exact statistics.
    pub fn sample<R: Rng + ?Sized>(&self, x: &[bool], rng: &mut R) -> Result<(bool, OrDemoOutcome)> {
        let stats = self.exact(x)?;
        let mut state = self.run(x, &mut QueryCounter::new())?;
        state.postselect_register(Register::single(self.target()), 1)?;
        let value = state.measure(self.index_register(), rng)?;
        Ok((value >= 1, stats))
    }
}

impl CoherentAlgorithm for OrDemo {
    fn num_inputs(&self) -> usize {
        self.n
    }

    fn query_count(&self) -> usize {
        1
    }

    fn run(&self, x: &[bool], counter: &mut QueryCounter) -> Result<PureState> {
        if x.len() != self.n {
            return Err(Error::domain(format!("expected {} bits, got {}", self.n, x.len())));
        }
        let mut state = self.initial_state()?;
        state.apply_bit_query(x, self.index_register(), Addressing::OneBased, self.target(), counter)?;
        Ok(state)
    }

    fn accepts(&self, index: usize) -> bool {
        index & 1 == 1
    }

    fn output(&self, index: usize) -> bool {
        index >> 1 >= 1
    }
}

/// Exact statistics of the OR demo; see [`OrDemo`].
pub fn or_postselect_demo(x: &[bool], eps0: f64) -> Result<OrDemoOutcome> {
    OrDemo::new(x.len(), eps0)?.exact(x)
}

/// One sampled run of the OR demo.
pub fn or_postselect_demo_sample<R: Rng + ?Sized>(
    x: &[bool],
    eps0: f64,
    rng: &mut R,
) -> Result<(bool, OrDemoOutcome)> {
    OrDemo::new(x.len(), eps0)?.sample(x, rng)
}
