//! Real-amplitude state-vector simulator with query oracles and postselection.
//!
//! Qubits are numbered from 0, and qubit 0 is the most significant bit of a
//! basis index. Every other module (truth tables, subset bitmasks) uses the
//! same convention: the first variable or qubit is the highest bit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of qubits a dense state may carry.
pub const MAX_QUBITS: usize = 24;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOL: f64 = 1e-9;

/// Orthogonality tolerance for single-qubit gates.
pub const GATE_TOL: f64 = 1e-10;

/// Below this success probability a postselection is treated as impossible.
pub const POSTSELECT_ZERO: f64 = 1e-15;

/// Amplitudes at or below this magnitude are ignored by the subset-degree check.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Number of oracle queries charged during an execution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounter {
    count: u64,
}

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn charge(&mut self, queries: u64) {
        self.count += queries;
    }
}

/// A contiguous block of qubits read as an unsigned integer, first qubit most
/// significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Register {
    pub start: usize,
    pub width: usize,
}

impl Register {
    pub fn new(start: usize, width: usize) -> Self {
        Self { start, width }
    }

    pub fn single(qubit: usize) -> Self {
        Self { start: qubit, width: 1 }
    }

    pub fn end(&self) -> usize {
        self.start + self.width
    }

    pub fn contains(&self, qubit: usize) -> bool {
        (self.start..self.end()).contains(&qubit)
    }

    pub fn overlaps(&self, other: &Register) -> bool {
        self.start < other.end() && other.start < self.end()
    }

    fn check(&self, num_qubits: usize) -> Result<()> {
        if self.width == 0 || self.end() > num_qubits {
            return Err(Error::domain(format!(
                "register {}..{} outside a {num_qubits}-qubit state",
                self.start,
                self.end()
            )));
        }
        Ok(())
    }

    /// Value held by this register in basis state `index`.
    #[inline]
    pub fn value(&self, num_qubits: usize, index: usize) -> usize {
        let shift = num_qubits - self.end();
        (index >> shift) & ((1usize << self.width) - 1)
    }
}

/// How a register value selects an input position in a bit query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Addressing {
    /// Value `v` reads `x[v]`; values `>= N` leave the target untouched.
    ZeroBased,
    /// Value `v` reads the 1-indexed bit `x_v`; value 0 and values `> N`
    /// leave the target untouched.
    OneBased,
}

impl Addressing {
    #[inline]
    fn position(self, value: usize, len: usize) -> Option<usize> {
        match self {
            Addressing::ZeroBased => (value < len).then_some(value),
            Addressing::OneBased => (value >= 1 && value <= len).then(|| value - 1),
        }
    }
}

/// A 2x2 real gate, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate(pub [[f64; 2]; 2]);

impl Gate {
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Gate([[h, h], [h, -h]])
    }

    pub fn pauli_x() -> Self {
        Gate([[0.0, 1.0], [1.0, 0.0]])
    }

    /// Rotation taking |0> to `a|0> + b|1>`; requires `a^2 + b^2 = 1`.
    pub fn preparing(a: f64, b: f64) -> Self {
        Gate([[a, -b], [b, a]])
    }

    pub fn is_orthogonal(&self) -> bool {
        let [[a, b], [c, d]] = self.0;
        ((a * a + c * c) - 1.0).abs() <= GATE_TOL
            && ((b * b + d * d) - 1.0).abs() <= GATE_TOL
            && (a * b + c * d).abs() <= GATE_TOL
    }
}

/// Exact outcome probabilities of measuring a register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    /// Nonzero outcomes as `(value, probability)` pairs.
    pub fn outcomes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate().filter(|&(_, p)| p > 0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A pure state of `num_qubits` qubits with real amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<f64>,
}

impl PureState {
    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::domain(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![0.0; dim];
        amplitudes[index] = 1.0;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Wraps an already-normalized amplitude vector.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<f64>) -> Result<Self> {
        check_width(num_qubits)?;
        if amplitudes.len() != 1usize << num_qubits {
            return Err(Error::domain(format!(
                "expected {} amplitudes, got {}",
                1usize << num_qubits,
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm_sq.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("state has norm {}", norm_sq.sqrt())));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Normalizes `amplitudes` first; fails on zero mass.
    pub fn from_unnormalized(num_qubits: usize, mut amplitudes: Vec<f64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a zero vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(num_qubits, amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> f64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    #[inline]
    fn bit(&self, qubit: usize) -> usize {
        1usize << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::domain(format!(
                "qubit {qubit} outside a {}-qubit state",
                self.num_qubits
            )));
        }
        Ok(())
    }

    fn debug_check_norm(&self) {
        debug_assert!(
            (self.norm() - 1.0).abs() <= NORM_TOL,
            "norm drifted to {}",
            self.norm()
        );
    }

    /// Applies `gate` to `qubit`, optionally only where `control` is 1.
    pub fn apply_gate(&mut self, qubit: usize, gate: Gate, control: Option<usize>) -> Result<()> {
        self.check_qubit(qubit)?;
        if let Some(c) = control {
            self.check_qubit(c)?;
            if c == qubit {
                return Err(Error::domain("control and target coincide"));
            }
        }
        if !gate.is_orthogonal() {
            return Err(Error::domain(format!("gate {:?} is not orthogonal", gate.0)));
        }
        let [[g00, g01], [g10, g11]] = gate.0;
        let tbit = self.bit(qubit);
        let cbit = control.map(|c| self.bit(c));
        for i in 0..self.amplitudes.len() {
            if i & tbit != 0 || cbit.is_some_and(|c| i & c == 0) {
                continue;
            }
            let j = i | tbit;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = g00 * a0 + g01 * a1;
            self.amplitudes[j] = g10 * a0 + g11 * a1;
        }
        self.debug_check_norm();
        Ok(())
    }

    pub fn hadamard(&mut self, qubit: usize) -> Result<()> {
        self.apply_gate(qubit, Gate::hadamard(), None)
    }

    pub fn hadamard_register(&mut self, reg: Register) -> Result<()> {
        reg.check(self.num_qubits)?;
        for q in reg.start..reg.end() {
            self.hadamard(q)?;
        }
        Ok(())
    }

    /// Bit-write query `|i>|b> -> |i>|b xor x_i>`; charges one query.
    pub fn apply_bit_query(
        &mut self,
        x: &[bool],
        index: Register,
        addressing: Addressing,
        target: usize,
        counter: &mut QueryCounter,
    ) -> Result<()> {
        index.check(self.num_qubits)?;
        self.check_qubit(target)?;
        if index.contains(target) {
            return Err(Error::domain("query target lies inside the index register"));
        }
        let reachable = match addressing {
            Addressing::ZeroBased => 1usize << index.width,
            Addressing::OneBased => (1usize << index.width) - 1,
        };
        if reachable < x.len() {
            return Err(Error::domain(format!(
                "{}-qubit index register cannot address {} positions",
                index.width,
                x.len()
            )));
        }
        let tbit = self.bit(target);
        for i in 0..self.amplitudes.len() {
            if i & tbit != 0 {
                continue;
            }
            let v = index.value(self.num_qubits, i);
            if addressing.position(v, x.len()).is_some_and(|p| x[p]) {
                self.amplitudes.swap(i, i | tbit);
            }
        }
        counter.charge(1);
        self.debug_check_norm();
        Ok(())
    }

    /// Phase oracle over subsets: `|S> -> (-1)^{x.S} |S>`, charged `degree`
    /// queries. The register holds the characteristic vector of `S` with
    /// `x[0]` on its first qubit.
    pub fn apply_subset_phase_query(
        &mut self,
        x: &[bool],
        subsets: Register,
        degree: usize,
        counter: &mut QueryCounter,
    ) -> Result<()> {
        subsets.check(self.num_qubits)?;
        if subsets.width != x.len() {
            return Err(Error::domain(format!(
                "subset register has {} qubits for {} input bits",
                subsets.width,
                x.len()
            )));
        }
        let xmask = bits_to_mask(x);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let s = subsets.value(self.num_qubits, i);
            if a.abs() > SUPPORT_TOL && s.count_ones() as usize > degree {
                return Err(Error::DegreeOverflow(format!(
                    "subset of size {} carries amplitude {a:e} with budget {degree}",
                    s.count_ones()
                )));
            }
        }
        for i in 0..self.amplitudes.len() {
            let s = subsets.value(self.num_qubits, i);
            if (s & xmask).count_ones() % 2 == 1 {
                self.amplitudes[i] = -self.amplitudes[i];
            }
        }
        counter.charge(degree as u64);
        Ok(())
    }

    /// Projects onto the basis states accepted by `pred` and renormalizes.
    /// Returns the success probability.
    pub fn postselect(&mut self, pred: impl Fn(usize) -> bool) -> Result<f64> {
        let success: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|&(i, _)| pred(i))
            .map(|(_, a)| a * a)
            .sum();
        if success < POSTSELECT_ZERO {
            return Err(Error::PostselectionImpossible(success));
        }
        let scale = success.sqrt().recip();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a = if pred(i) { *a * scale } else { 0.0 };
        }
        self.debug_check_norm();
        Ok(success)
    }

    /// Postselects on `reg` holding `value`.
    pub fn postselect_register(&mut self, reg: Register, value: usize) -> Result<f64> {
        reg.check(self.num_qubits)?;
        let n = self.num_qubits;
        self.postselect(|i| reg.value(n, i) == value)
    }

    /// Exact outcome distribution of measuring `reg`.
    pub fn distribution(&self, reg: Register) -> Result<Distribution> {
        reg.check(self.num_qubits)?;
        let mut probs = vec![0.0; 1usize << reg.width];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[reg.value(self.num_qubits, i)] += a * a;
        }
        Ok(Distribution { probs })
    }

    /// Measures `reg`, collapsing the state. Deterministic given the generator state.
    pub fn measure<R: Rng + ?Sized>(&mut self, reg: Register, rng: &mut R) -> Result<usize> {
        let dist = self.distribution(reg)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut outcome = None;
        for (v, p) in dist.outcomes() {
            acc += p;
            outcome = Some(v);
            if u < acc {
                break;
            }
        }
        let outcome = outcome.expect("normalized state has a nonzero outcome");
        self.postselect_register(reg, outcome)?;
        Ok(outcome)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::capacity(format!(
            "{num_qubits} qubits outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Bitmask of an input string, `x[0]` most significant.
pub fn bits_to_mask(x: &[bool]) -> usize {
    x.iter().fold(0usize, |m, &b| (m << 1) | b as usize)
}

/// Inverse of [`bits_to_mask`] for a string of length `n`.
pub fn mask_to_bits(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect()
}

/// Smallest `w` with `2^w >= n`.
pub fn ceil_log2(n: usize) -> usize {
    let mut w = 0;
    while (1usize << w) < n {
        w += 1;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn basis_states() {
        assert_eq!(PureState::basis(1, 0).unwrap().amplitudes(), &[1.0, 0.0]);
        assert_eq!(PureState::basis(2, 3).unwrap().amplitudes(), &[0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(PureState::basis(25, 0), Err(Error::Capacity(_))));
        assert!(matches!(PureState::basis(0, 0), Err(Error::Capacity(_))));
        assert!(matches!(PureState::basis(2, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn hadamard_basics() {
        let mut s = PureState::basis(1, 0).unwrap();
        s.hadamard(0).unwrap();
        assert!(close(s.amplitudes(), &[H, H], 1e-15));
        s.hadamard(0).unwrap();
        assert!(close(s.amplitudes(), &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn rejects_non_orthogonal_and_self_control() {
        let mut s = PureState::basis(2, 0).unwrap();
        let bad = Gate([[1.0, 0.1], [0.0, 1.0]]);
        assert!(matches!(s.apply_gate(0, bad, None), Err(Error::Domain(_))));
        assert!(matches!(s.apply_gate(0, Gate::hadamard(), Some(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn controlled_hadamard_acts_on_one_branch() {
        // (a|0> + b|1>) (x) psi, psi = (3, 1)/sqrt(10)
        let (a, b) = (0.6, 0.8);
        let r = 10f64.sqrt();
        let amps = vec![a * 3.0 / r, a / r, b * 3.0 / r, b / r];
        let mut s = PureState::from_amplitudes(2, amps).unwrap();
        s.apply_gate(1, Gate::hadamard(), Some(0)).unwrap();
        // H psi = (4/sqrt2, 2/sqrt2)/sqrt10
        let expect = [
            a * 3.0 / r,
            a / r,
            b * 4.0 * H / r,
            b * 2.0 * H / r,
        ];
        assert!(close(s.amplitudes(), &expect, 1e-12));
    }

    #[test]
    fn bit_query_uniform_index() {
        // N = 4, x = 1000, index register 2 qubits, target qubit 2.
        let x = [true, false, false, false];
        let mut s = PureState::basis(3, 0).unwrap();
        s.hadamard_register(Register::new(0, 2)).unwrap();
        let mut c = QueryCounter::new();
        s.apply_bit_query(&x, Register::new(0, 2), Addressing::ZeroBased, 2, &mut c)
            .unwrap();
        assert_eq!(c.count(), 1);
        // 1/2 sum_i |i>|x_i>
        let expect = [0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0];
        assert!(close(s.amplitudes(), &expect, 1e-15));
    }

    #[test]
    fn bit_query_zero_input_is_identity() {
        let x = [false; 4];
        let mut s = PureState::basis(3, 0).unwrap();
        s.hadamard_register(Register::new(0, 3)).unwrap();
        let before = s.clone();
        let mut c = QueryCounter::new();
        s.apply_bit_query(&x, Register::new(0, 2), Addressing::ZeroBased, 2, &mut c)
            .unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn bit_query_single_basis_one_based() {
        // register value 2 reads x_2 (1-indexed).
        let x = [false, true, false];
        let mut s = PureState::basis(3, 0b100).unwrap();
        let mut c = QueryCounter::new();
        s.apply_bit_query(&x, Register::new(0, 2), Addressing::OneBased, 2, &mut c)
            .unwrap();
        assert_eq!(s.amplitude(0b101), 1.0);
        assert_eq!(c.count(), 1);
        // value 0 is idle
        let mut s0 = PureState::basis(3, 0).unwrap();
        s0.apply_bit_query(&[true, true, true], Register::new(0, 2), Addressing::OneBased, 2, &mut c)
            .unwrap();
        assert_eq!(s0.amplitude(0), 1.0);
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn bit_query_register_checks() {
        let mut s = PureState::basis(3, 0).unwrap();
        let mut c = QueryCounter::new();
        let e = s.apply_bit_query(&[true; 2], Register::new(0, 2), Addressing::ZeroBased, 1, &mut c);
        assert!(matches!(e, Err(Error::Domain(_))));
        // 2 qubits one-based reach only 3 positions
        let e = s.apply_bit_query(&[true; 4], Register::new(0, 2), Addressing::OneBased, 2, &mut c);
        assert!(matches!(e, Err(Error::Domain(_))));
        assert_eq!(c.count(), 0);
    }

    #[test]
    fn subset_phase_query() {
        let mut c = QueryCounter::new();
        // x = 0^N -> identity, still charged
        let mut s = PureState::basis(2, 0).unwrap();
        s.hadamard_register(Register::new(0, 2)).unwrap();
        let before = s.clone();
        s.apply_subset_phase_query(&[false, false], Register::new(0, 2), 2, &mut c)
            .unwrap();
        assert_eq!(s, before);
        assert_eq!(c.count(), 2);

        let mut full = PureState::basis(2, 0b11).unwrap();
        full.apply_subset_phase_query(&[true, true], Register::new(0, 2), 2, &mut c)
            .unwrap();
        assert_eq!(full.amplitude(0b11), 1.0);

        let mut one = PureState::basis(2, 0b10).unwrap();
        one.apply_subset_phase_query(&[true, true], Register::new(0, 2), 1, &mut c)
            .unwrap();
        assert_eq!(one.amplitude(0b10), -1.0);
        assert_eq!(c.count(), 5);
    }

    #[test]
    fn subset_phase_query_degree_overflow() {
        let mut c = QueryCounter::new();
        let mut s = PureState::basis(2, 0b11).unwrap();
        let e = s.apply_subset_phase_query(&[true, false], Register::new(0, 2), 1, &mut c);
        assert!(matches!(e, Err(Error::DegreeOverflow(_))));
        assert_eq!(c.count(), 0);
    }

    #[test]
    fn postselect_cases() {
        let mut plus = PureState::basis(1, 0).unwrap();
        plus.hadamard(0).unwrap();
        let mut p = plus.clone();
        let prob = p.postselect(|i| i == 0).unwrap();
        assert!((prob - 0.5).abs() < 1e-15);
        assert!(close(p.amplitudes(), &[1.0, 0.0], 1e-15));

        let mut all = plus.clone();
        assert!((all.postselect(|_| true).unwrap() - 1.0).abs() < 1e-15);
        assert!(close(all.amplitudes(), plus.amplitudes(), 1e-15));

        let mut zero = PureState::basis(1, 0).unwrap();
        assert!(matches!(
            zero.postselect(|i| i == 1),
            Err(Error::PostselectionImpossible(_))
        ));
    }

    #[test]
    fn measure_distribution_and_sampling() {
        let zero = PureState::basis(1, 0).unwrap();
        let d = zero.distribution(Register::single(0)).unwrap();
        assert_eq!(d.prob(0), 1.0);

        let mut plus = PureState::basis(1, 0).unwrap();
        plus.hadamard(0).unwrap();
        let d = plus.distribution(Register::single(0)).unwrap();
        assert!((d.prob(0) - 0.5).abs() < 1e-15 && (d.prob(1) - 0.5).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| plus.clone().measure(Register::single(0), &mut rng).unwrap() == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn measurement_collapses_and_is_seeded() {
        let mut s = PureState::basis(2, 0).unwrap();
        s.hadamard_register(Register::new(0, 2)).unwrap();
        let run = |seed| {
            let mut t = s.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = t.measure(Register::single(0), &mut rng).unwrap();
            (v, t)
        };
        let (v, t) = run(5);
        assert_eq!(run(5), (v, t.clone()));
        let d = t.distribution(Register::single(0)).unwrap();
        assert!((d.prob(v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_form() {
        let s = PureState::basis(1, 1).unwrap();
        assert_eq!(s.to_json(), r#"{"num_qubits":1,"amplitudes":[0.0,1.0]}"#);
    }

    fn random_state(n: usize) -> impl Strategy<Value = PureState> {
        prop::collection::vec(-1.0f64..1.0, 1 << n).prop_filter_map("nonzero", move |v| {
            PureState::from_unnormalized(n, v).ok()
        })
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(s in random_state(4), q in 0usize..4, c in 0usize..4, theta in 0.0f64..6.3) {
            let mut s = s;
            let g = Gate::preparing(theta.cos(), theta.sin());
            let control = (c != q).then_some(c);
            s.apply_gate(q, g, control).unwrap();
            s.hadamard(q).unwrap();
            prop_assert!((s.norm() - 1.0).abs() <= NORM_TOL);
        }

        #[test]
        fn postselect_prob_matches_mass(s in random_state(4), mask in 1usize..16) {
            let expected: f64 = s.amplitudes().iter().enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a * a).sum();
            let mut t = s.clone();
            match t.postselect(|i| mask >> i & 1 == 1) {
                Ok(p) => prop_assert!((p - expected).abs() <= 1e-12),
                Err(Error::PostselectionImpossible(_)) => prop_assert!(expected < POSTSELECT_ZERO),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn distributions_sum_to_one(s in random_state(5), start in 0usize..5, w in 1usize..5) {
            prop_assume!(start + w <= 5);
            let d = s.distribution(Register::new(start, w)).unwrap();
            prop_assert!((d.total() - 1.0).abs() <= NORM_TOL);
        }
    }
}
