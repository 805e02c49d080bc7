//! Functions on the Boolean cube: truth tables, multilinear polynomials,
//! Fourier spectra, and extraction of acceptance polynomials from simulated
//! postselection algorithms.
//!
//! A point `x` of `{0,1}^N` and a subset `S` of `[N]` are both stored as a
//! bitmask whose most significant of `N` bits is the first variable; see
//! [`crate::qsim::bits_to_mask`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{mask_to_bits, PureState, QueryCounter};

/// Coefficients at or below this magnitude do not count towards degree.
pub const COEFF_ZERO: f64 = 1e-12;

/// Largest input length accepted by [`extract_pq`].
pub const MAX_EXTRACT_INPUTS: usize = 12;

/// A query algorithm without adaptive classical control, so that its final
/// state is a fixed linear-algebraic function of the input.
///
/// The algorithm declares its own output convention: a basis state of the
/// final state has `a = 1` when [`accepts`](Self::accepts) holds and output
/// bit `b` given by [`output`](Self::output).
pub trait CoherentAlgorithm: Sync {
    fn num_inputs(&self) -> usize;

    /// Number of queries charged on every input.
    fn query_count(&self) -> usize;

    /// Final state before the postselecting measurement.
    fn run(&self, x: &[bool], counter: &mut QueryCounter) -> Result<PureState>;

    fn accepts(&self, index: usize) -> bool;

    fn output(&self, index: usize) -> bool;

    /// `(Pr[a = 1], Pr[a = 1 and b = 1])` on input `x`.
    fn acceptance(&self, x: &[bool]) -> Result<(f64, f64)> {
        let mut counter = QueryCounter::new();
        let state = self.run(x, &mut counter)?;
        if counter.count() != self.query_count() as u64 {
            return Err(Error::TheoremViolation(format!(
                "algorithm declared {} queries but charged {}",
                self.query_count(),
                counter.count()
            )));
        }
        let (mut q, mut p) = (0.0, 0.0);
        for (i, a) in state.amplitudes().iter().enumerate() {
            if self.accepts(i) {
                q += a * a;
                if self.output(i) {
                    p += a * a;
                }
            }
        }
        Ok((q, p))
    }
}

// ---------------------------------------------------------------------------
// Truth tables

/// Values of a real function on `{0,1}^N`, indexed by point bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    n: usize,
    values: Vec<f64>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n >= usize::BITS as usize || values.len() != 1usize << n {
            return Err(Error::domain(format!(
                "truth table for N = {n} needs 2^N entries, got {}",
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[bool]) -> f64) -> Self {
        let values = (0..1usize << n).map(|m| f(&mask_to_bits(m, n))).collect();
        Self { n, values }
    }

    /// Table of a function of the Hamming weight only.
    pub fn symmetric(n: usize, f: impl Fn(usize) -> f64) -> Self {
        let values = (0..1usize << n).map(|m| f(m.count_ones() as usize)).collect();
        Self { n, values }
    }

    pub fn or(n: usize) -> Self {
        Self::symmetric(n, |w| (w > 0) as u8 as f64)
    }

    pub fn and(n: usize) -> Self {
        Self::symmetric(n, |w| (w == n) as u8 as f64)
    }

    /// `MAJ_N(x) = 1` iff `2|x| >= N`.
    pub fn majority(n: usize) -> Self {
        Self::symmetric(n, |w| (2 * w >= n) as u8 as f64)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { n, values: vec![c; 1usize << n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    pub fn is_boolean(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Value per Hamming weight when the table is symmetric.
    pub fn weight_profile(&self) -> Option<Vec<f64>> {
        let mut profile: Vec<Option<f64>> = vec![None; self.n + 1];
        for (m, &v) in self.values.iter().enumerate() {
            let slot = &mut profile[m.count_ones() as usize];
            match slot {
                None => *slot = Some(v),
                Some(prev) if *prev != v => return None,
                _ => {}
            }
        }
        profile.into_iter().collect()
    }
}

impl FromStr for TruthTable {
    type Err = Error;

    /// Either one token of `'0'`/`'1'` characters, or whitespace-separated reals.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let values: Vec<f64> = match tokens.as_slice() {
            [] => return Err(Error::domain("empty truth table")),
            [single] if single.chars().all(|c| c == '0' || c == '1') => {
                single.chars().map(|c| if c == '1' { 1.0 } else { 0.0 }).collect()
            }
            many => many
                .iter()
                .map(|t| t.parse::<f64>().map_err(|e| Error::domain(format!("bad value {t:?}: {e}"))))
                .collect::<Result<_>>()?,
        };
        if !values.len().is_power_of_two() {
            return Err(Error::domain(format!("{} entries is not a power of two", values.len())));
        }
        let n = values.len().trailing_zeros() as usize;
        Self::new(n, values)
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_boolean() {
            for &v in &self.values {
                f.write_str(if v == 1.0 { "1" } else { "0" })?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

// ---------------------------------------------------------------------------
// Multilinear polynomials

/// `sum_S c_S prod_{i in S} x_i`, subsets as bitmasks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultilinearPoly {
    n: usize,
    coeffs: BTreeMap<usize, f64>,
}

/// One monomial in the JSON polynomial format; `subset` lists 1-based
/// variable indices in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson<C> {
    pub subset: Vec<usize>,
    pub coeff: C,
}

/// JSON polynomial format `{n, terms: [{subset, coeff}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson<C> {
    pub n: usize,
    pub terms: Vec<TermJson<C>>,
}

/// 1-based ascending variable list of a subset mask.
pub fn subset_indices(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> (n - 1 - i) & 1 == 1).map(|i| i + 1).collect()
}

/// Mask of a 1-based variable list.
pub fn subset_mask(indices: &[usize], n: usize) -> Result<usize> {
    indices.iter().try_fold(0usize, |m, &i| {
        if i == 0 || i > n {
            return Err(Error::domain(format!("variable {i} outside 1..={n}")));
        }
        Ok(m | 1usize << (n - i))
    })
}

impl MultilinearPoly {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.set(0, c);
        p
    }

    /// The linear form `c0 + c1 * sum_i x_i`.
    pub fn weight_linear(n: usize, c0: f64, c1: f64) -> Self {
        let mut p = Self::constant(n, c0);
        for i in 0..n {
            p.set(1usize << i, c1);
        }
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (mask, c) in terms {
            if n < usize::BITS as usize && mask >> n != 0 {
                return Err(Error::domain(format!("subset mask {mask:#b} outside {n} variables")));
            }
            *p.coeffs.entry(mask).or_insert(0.0) += c;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, mask: usize, c: f64) {
        self.coeffs.insert(mask, c);
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    /// Largest subset size with a coefficient above [`COEFF_ZERO`]; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms()
            .filter(|(_, c)| c.abs() > COEFF_ZERO)
            .map(|(m, _)| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Value at a real point.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n {
            return Err(Error::domain(format!("point has {} coordinates, need {}", point.len(), self.n)));
        }
        Ok(self
            .terms()
            .map(|(m, c)| {
                (0..self.n)
                    .filter(|&i| m >> (self.n - 1 - i) & 1 == 1)
                    .fold(c, |acc, i| acc * point[i])
            })
            .sum())
    }

    /// Value at a cube point given as a bitmask.
    pub fn eval_cube(&self, x: usize) -> f64 {
        self.terms().filter(|(m, _)| m & !x == 0).map(|(_, c)| c).sum()
    }

    /// Values on the whole cube (zeta transform).
    pub fn to_truth_table(&self) -> TruthTable {
        let mut values = vec![0.0; 1usize << self.n];
        for (m, c) in self.terms() {
            values[m] += c;
        }
        for b in 0..self.n {
            let bit = 1usize << b;
            for m in 0..values.len() {
                if m & bit != 0 {
                    values[m] += values[m ^ bit];
                }
            }
        }
        TruthTable { n: self.n, values }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, coeffs: self.coeffs.iter().map(|(&m, &c)| (m, c * s)).collect() }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::domain("polynomials over different variable counts"));
        }
        let mut out = self.clone();
        for (m, c) in other.terms() {
            *out.coeffs.entry(m).or_insert(0.0) += s * c;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> PolyJson<f64> {
        PolyJson {
            n: self.n,
            terms: self
                .terms()
                .map(|(m, c)| TermJson { subset: subset_indices(m, self.n), coeff: c })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson<f64>) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| Ok((subset_mask(&t.subset, json.n)?, t.coeff)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(json.n, terms)
    }
}

/// Unique multilinear polynomial agreeing with `tt` on the cube.
pub fn mobius_interpolate(tt: &TruthTable) -> MultilinearPoly {
    let mut c = tt.values.clone();
    for b in 0..tt.n {
        let bit = 1usize << b;
        for m in 0..c.len() {
            if m & bit != 0 {
                c[m] -= c[m ^ bit];
            }
        }
    }
    MultilinearPoly {
        n: tt.n,
        coeffs: c.into_iter().enumerate().filter(|&(_, v)| v != 0.0).collect(),
    }
}

pub fn eval_multilinear(p: &MultilinearPoly, point: &[f64]) -> Result<f64> {
    p.eval(point)
}

// ---------------------------------------------------------------------------
// Fourier analysis

/// `g(S) = 2^-N sum_x g(x) (-1)^{x.S}`, indexed by subset mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 1usize << n {
            return Err(Error::domain("spectrum needs 2^N coefficients"));
        }
        Ok(Self { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Largest `|c(S)|` over subsets with `|S| > degree`.
    pub fn max_beyond(&self, degree: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| m.count_ones() as usize > degree)
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }
}

fn walsh_hadamard(data: &mut [f64]) {
    let mut h = 1;
    while h < data.len() {
        for block in (0..data.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

pub fn fourier(tt: &TruthTable) -> FourierSpectrum {
    let mut c = tt.values.clone();
    walsh_hadamard(&mut c);
    let scale = (1usize << tt.n) as f64;
    c.iter_mut().for_each(|v| *v /= scale);
    FourierSpectrum { n: tt.n, coeffs: c }
}

/// `g(x) = sum_S g(S) (-1)^{x.S}`.
pub fn inverse_fourier(spec: &FourierSpectrum) -> TruthTable {
    let mut v = spec.coeffs.clone();
    walsh_hadamard(&mut v);
    TruthTable { n: spec.n, values: v }
}

// ---------------------------------------------------------------------------
// Extraction and ratio checks

/// Acceptance polynomials of a coherent postselection algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedPair {
    /// `Pr[a = 1 and b = 1]`.
    pub p: MultilinearPoly,
    /// `Pr[a = 1]`.
    pub q: MultilinearPoly,
    pub queries: usize,
}

/// Simulates `alg` on every input and interpolates `P` and `Q`.
///
/// Fails with [`Error::TheoremViolation`] if either polynomial has degree
/// above twice the query count.
pub fn extract_pq<A: CoherentAlgorithm + ?Sized>(alg: &A) -> Result<ExtractedPair> {
    let n = alg.num_inputs();
    if n > MAX_EXTRACT_INPUTS {
        return Err(Error::capacity(format!(
            "extraction simulates 2^{n} inputs; limit is N <= {MAX_EXTRACT_INPUTS}"
        )));
    }
    let rows: Vec<(f64, f64)> = (0..1usize << n)
        .into_par_iter()
        .map(|m| alg.acceptance(&mask_to_bits(m, n)))
        .collect::<Result<_>>()?;
    let q_tt = TruthTable::new(n, rows.iter().map(|r| r.0).collect())?;
    let p_tt = TruthTable::new(n, rows.iter().map(|r| r.1).collect())?;
    let (p, q) = (mobius_interpolate(&p_tt), mobius_interpolate(&q_tt));
    let t = alg.query_count();
    for (name, poly) in [("P", &p), ("Q", &q)] {
        if poly.degree() > 2 * t {
            return Err(Error::TheoremViolation(format!(
                "deg {name} = {} exceeds 2T = {}",
                poly.degree(),
                2 * t
            )));
        }
    }
    Ok(ExtractedPair { p, q, queries: t })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub ok: bool,
    pub max_deviation: f64,
    /// Point (bitmask) attaining the maximum deviation.
    pub argmax: usize,
}

/// Slack for floating rounding in [`ratio_check`].
pub const RATIO_SLACK: f64 = 1e-12;

/// Exhaustively checks `|P(x)/Q(x) - f(x)| <= eps` on the cube.
pub fn ratio_check(
    p: &MultilinearPoly,
    q: &MultilinearPoly,
    f: &TruthTable,
    eps: f64,
) -> Result<RatioCheck> {
    if p.n() != f.n() || q.n() != f.n() {
        return Err(Error::domain("P, Q and f must share N"));
    }
    let (pt, qt) = (p.to_truth_table(), q.to_truth_table());
    let mut best = RatioCheck { ok: true, max_deviation: 0.0, argmax: 0 };
    for x in 0..1usize << f.n() {
        let qx = qt.value(x);
        if qx.abs() < COEFF_ZERO {
            return Err(Error::domain(format!("Q vanishes at x = {x:#b}")));
        }
        let dev = (pt.value(x) / qx - f.value(x)).abs();
        if dev > best.max_deviation {
            best.max_deviation = dev;
            best.argmax = x;
        }
    }
    best.ok = best.max_deviation <= eps + RATIO_SLACK;
    Ok(best)
}

// ---------------------------------------------------------------------------
// Univariate polynomials

/// `sum_k coeffs[k] z^k`, trailing near-zero coefficients trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePoly {
    coeffs: Vec<f64>,
}

impl UnivariatePoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last().is_some_and(|c| c.abs() <= COEFF_ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }
}

/// Residual bound enforced at the interpolation nodes.
pub const INTERP_RESIDUAL: f64 = 1e-8;

/// Newton divided-difference interpolant through `samples`.
pub fn interpolate_univariate(samples: &[(f64, f64)]) -> Result<UnivariatePoly> {
    if samples.is_empty() {
        return Err(Error::domain("no samples"));
    }
    for (i, a) in samples.iter().enumerate() {
        if samples[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::domain(format!("duplicate node z = {}", a.0)));
        }
    }
    let k = samples.len();
    let zs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut dd: Vec<f64> = samples.iter().map(|s| s.1).collect();
    for level in 1..k {
        for i in (level..k).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (zs[i] - zs[i - level]);
        }
    }
    // Horner expansion of the Newton form into monomials.
    let mut coeffs = vec![dd[k - 1]];
    for j in (0..k - 1).rev() {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (p, &c) in coeffs.iter().enumerate() {
            next[p + 1] += c;
            next[p] -= c * zs[j];
        }
        next[0] += dd[j];
        coeffs = next;
    }
    let poly = UnivariatePoly::new(coeffs);
    for &(z, v) in samples {
        let r = (poly.eval(z) - v).abs();
        if r > INTERP_RESIDUAL * v.abs().max(1.0) {
            return Err(Error::domain(format!("interpolant residual {r:e} at z = {z}")));
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::OrDemo;
    use proptest::prelude::*;

    fn or2() -> TruthTable {
        TruthTable::or(2)
    }

    #[test]
    fn truth_table_parsing() {
        let t: TruthTable = "0111".parse().unwrap();
        assert_eq!(t, or2());
        assert_eq!(t.to_string(), "0111");
        let r: TruthTable = "0.5 1 -2 3e-1".parse().unwrap();
        assert_eq!(r.values(), &[0.5, 1.0, -2.0, 0.3]);
        assert_eq!(r.to_string().parse::<TruthTable>().unwrap(), r);
        assert!("011".parse::<TruthTable>().is_err());
        assert!("".parse::<TruthTable>().is_err());
        assert!("0 1 x".parse::<TruthTable>().is_err());
    }

    #[test]
    fn weight_profile_detects_symmetry() {
        assert_eq!(TruthTable::majority(4).weight_profile().unwrap(), vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        let dictator = TruthTable::from_fn(2, |x| x[0] as u8 as f64);
        assert!(dictator.weight_profile().is_none());
    }

    #[test]
    fn mobius_examples() {
        let and = mobius_interpolate(&TruthTable::and(2));
        assert_eq!(and.terms().filter(|(_, c)| *c != 0.0).collect::<Vec<_>>(), vec![(0b11, 1.0)]);

        let or = mobius_interpolate(&or2());
        assert_eq!(or.coeff(0b10), 1.0);
        assert_eq!(or.coeff(0b01), 1.0);
        assert_eq!(or.coeff(0b11), -1.0);
        assert_eq!(or.coeff(0), 0.0);
        for m in 0..4 {
            let x = mask_to_bits(m, 2);
            let pt: Vec<f64> = x.iter().map(|&b| b as u8 as f64).collect();
            assert_eq!(or.eval(&pt).unwrap(), or2().value(m));
        }
    }

    #[test]
    fn eval_examples() {
        let or = mobius_interpolate(&or2());
        assert_eq!(eval_multilinear(&or, &[1.0, 1.0]).unwrap(), 1.0);
        assert!((eval_multilinear(&or, &[0.5, 0.5]).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(eval_multilinear(&MultilinearPoly::zero(3), &[0.2, 0.4, 0.9]).unwrap(), 0.0);
        assert!(or.eval(&[1.0]).is_err());
    }

    #[test]
    fn variable_order_is_msb_first() {
        // x_1 alone: the point 10 (mask 0b10) evaluates to 1.
        let dictator = mobius_interpolate(&TruthTable::from_fn(2, |x| x[0] as u8 as f64));
        assert_eq!(dictator.coeff(0b10), 1.0);
        assert_eq!(subset_indices(0b10, 2), vec![1]);
        assert_eq!(subset_mask(&[1], 2).unwrap(), 0b10);
        assert!(subset_mask(&[3], 2).is_err());
    }

    #[test]
    fn fourier_examples() {
        let dictator = TruthTable::from_fn(1, |x| x[0] as u8 as f64);
        let s = fourier(&dictator);
        assert_eq!(s.coeffs(), &[0.5, -0.5]);

        let one = fourier(&TruthTable::constant(3, 1.0));
        assert_eq!(one.coeff(0), 1.0);
        assert!(one.coeffs()[1..].iter().all(|&c| c == 0.0));

        let parity = TruthTable::from_fn(2, |x| if x[0] ^ x[1] { -1.0 } else { 1.0 });
        let s = fourier(&parity);
        assert_eq!(s.coeffs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn json_round_trip() {
        let p = MultilinearPoly::from_terms(3, [(0, 0.25), (0b101, -1.5)]).unwrap();
        let json = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(json, r#"{"n":3,"terms":[{"subset":[],"coeff":0.25},{"subset":[1,3],"coeff":-1.5}]}"#);
        let back: PolyJson<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(MultilinearPoly::from_json(&back).unwrap(), p);
    }

    #[test]
    fn extract_or_demo_two_bits() {
        let demo = OrDemo::new(2, 0.1).unwrap();
        let pair = extract_pq(&demo).unwrap();
        let q_expect = MultilinearPoly::weight_linear(2, 0.01, 0.495);
        let p_expect = MultilinearPoly::weight_linear(2, 0.0, 0.495);
        for m in [0, 0b01, 0b10, 0b11] {
            assert!((pair.q.coeff(m) - q_expect.coeff(m)).abs() < 1e-12);
            assert!((pair.p.coeff(m) - p_expect.coeff(m)).abs() < 1e-12);
        }
        assert_eq!(pair.p.degree(), 1);
        assert_eq!(pair.q.degree(), 1);
    }

    #[test]
    fn ratio_check_examples() {
        let n = 4;
        let p = MultilinearPoly::weight_linear(n, 0.0, 1.0);
        let q = MultilinearPoly::weight_linear(n, 0.1, 1.0);
        let r = ratio_check(&p, &q, &TruthTable::or(n), 0.1).unwrap();
        assert!(r.ok);
        assert!((r.max_deviation - 0.1 / 1.1).abs() < 1e-12);
        assert_eq!(r.argmax.count_ones(), 1);

        let f = TruthTable::from_fn(2, |x| x[0] as u8 as f64);
        let exact = ratio_check(&mobius_interpolate(&f), &MultilinearPoly::constant(2, 1.0), &f, 0.0).unwrap();
        assert!(exact.ok && exact.max_deviation == 0.0);

        let flat = ratio_check(
            &MultilinearPoly::constant(2, 1.0),
            &MultilinearPoly::constant(2, 2.0),
            &f,
            0.4,
        )
        .unwrap();
        assert!(!flat.ok);

        let vanishing = MultilinearPoly::weight_linear(2, 0.0, 1.0);
        assert!(matches!(ratio_check(&p.clone(), &vanishing, &f, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn univariate_examples() {
        let c = interpolate_univariate(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(c.coeffs(), &[1.0]);
        let sq = interpolate_univariate(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]).unwrap();
        assert_eq!(sq.degree(), 2);
        assert!((sq.coeffs()[2] - 1.0).abs() < 1e-12 && sq.coeffs()[1].abs() < 1e-12);
        let single = interpolate_univariate(&[(3.0, -2.5)]).unwrap();
        assert_eq!(single.coeffs(), &[-2.5]);
        assert!(matches!(
            interpolate_univariate(&[(1.0, 0.0), (1.0, 2.0)]),
            Err(Error::Domain(_))
        ));
    }

    fn random_table(max_n: usize) -> impl Strategy<Value = TruthTable> {
        (0..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-4.0f64..4.0, 1usize << n)
                .prop_map(move |v| TruthTable::new(n, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn fourier_inverse_identity_and_parseval(tt in random_table(10)) {
            let spec = fourier(&tt);
            let back = inverse_fourier(&spec);
            for (a, b) in back.values().iter().zip(tt.values()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            let energy = tt.values().iter().map(|v| v * v).sum::<f64>() / tt.values().len() as f64;
            prop_assert!((spec.mass() - energy).abs() <= 1e-9);
        }

        #[test]
        fn mobius_is_inverse_of_cube_evaluation(tt in random_table(8)) {
            let back = mobius_interpolate(&tt).to_truth_table();
            for (a, b) in back.values().iter().zip(tt.values()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn low_degree_has_low_spectrum(n in 1usize..8, d in 0usize..4, seed in any::<u64>()) {
            let d = d.min(n);
            let mut state = seed;
            let terms: Vec<(usize, f64)> = (0..1usize << n)
                .filter(|m| m.count_ones() as usize <= d)
                .map(|m| {
                    state = crate::seed::splitmix64(state);
                    (m, (state % 2001) as f64 / 1000.0 - 1.0)
                })
                .collect();
            let p = MultilinearPoly::from_terms(n, terms).unwrap();
            let spec = fourier(&p.to_truth_table());
            prop_assert!(spec.max_beyond(d) <= 1e-10);
        }

        #[test]
        fn univariate_recovers_polynomials(coeffs in prop::collection::vec(-3.0f64..3.0, 1..7)) {
            let p = UnivariatePoly::new(coeffs.clone());
            let samples: Vec<(f64, f64)> = (0..coeffs.len()).map(|k| (k as f64, p.eval(k as f64))).collect();
            let q = interpolate_univariate(&samples).unwrap();
            for z in [-1.5, 0.25, 2.75] {
                prop_assert!((q.eval(z) - p.eval(z)).abs() <= 1e-7 * (1.0 + p.eval(z).abs()));
            }
        }
    }
}
