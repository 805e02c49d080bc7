//! Postselection algorithms for Majority built from elimination procedures.
//!
//! Family A holds the qubits with amplitude ratio `alpha/beta = 2^i`; the
//! A-elimination measures `5k` copies of each surviving qubit in trial `k`
//! and drops every index without a strict majority of `+` outcomes, until
//! the query budget `180 * ceil(log2(N/t))` is spent or the family is
//! empty. Family B holds the qubits that equal `|+>` exactly at the weights
//! near `0` and `N/2`; the B-elimination measures the front element once per
//! trial for `8t` trials and drops it on a `-` outcome. Either procedure
//! outputs 1 iff its family was emptied.
//!
//! Every procedure comes in a sampled form (a transcript of simulated
//! measurements) and an exact form (the output-1 probability computed by
//! dynamic programming). Both accept real weights `z`, which the sampled
//! form uses only through the per-qubit `+` probability.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

use crate::constructions::ABPair;
use crate::error::{Error, Result};
use crate::qsim::QueryCounter;

/// `|<+|a>|^2` for the qubit halfway (in angle) between two family-A
/// neighbours that straddle `|+>`: `(3 + 2 sqrt2) / 6`.
pub const LAMBDA_SQ: f64 = (3.0 + 2.0 * std::f64::consts::SQRT_2) / 6.0;

/// Largest family A the exact evaluator accepts.
pub const MAX_EXACT_FAMILY: usize = 15;

/// Constants of the elimination procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityParams {
    pub n: usize,
    pub t: usize,
    pub budget_constant: u64,
    pub copies_factor: u64,
    pub b_trials_factor: u64,
    /// Odd number of A-elimination runs combined by majority vote.
    pub amplification_reps: u64,
}

impl MajorityParams {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if t == 0 || 4 * t > n {
            return Err(Error::domain(format!("t = {t} outside 1..=N/4 for N = {n}")));
        }
        Ok(Self {
            n,
            t,
            budget_constant: 180,
            copies_factor: 5,
            b_trials_factor: 8,
            amplification_reps: 1,
        })
    }

    pub fn with_reps(mut self, reps: u64) -> Result<Self> {
        if reps % 2 == 0 {
            return Err(Error::domain(format!("amplification_reps = {reps} must be odd")));
        }
        self.amplification_reps = reps;
        Ok(self)
    }

    /// `ceil(log2(N/t))`, computed without floating point.
    pub fn log_ratio(&self) -> u32 {
        let mut l = 0;
        while (self.t << l) < self.n {
            l += 1;
        }
        l
    }

    /// Query budget of one A-elimination run.
    pub fn budget(&self) -> u64 {
        self.budget_constant * self.log_ratio() as u64
    }

    pub fn b_trials(&self) -> u64 {
        self.b_trials_factor * self.t as u64
    }
}

/// An index of a qubit family with its ancilla amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub i: i64,
    pub ab: ABPair,
}

/// Family A: `i` in `-L..=L` with `L = ceil(log2(N/t))`, ratio `2^i`.
pub fn build_family_a(n: usize, t: usize) -> Result<Vec<FamilyEntry>> {
    let l = MajorityParams::new(n, t)?.log_ratio() as i64;
    (-l..=l)
        .map(|i| {
            Ok(FamilyEntry { i, ab: ABPair::from_ratio(2f64.powi(i as i32))? })
        })
        .collect()
}

/// Family B in order: `1..t` then `N/2-t+1..N/2`, ratio `(N-2i)/(sqrt2 i)`.
/// Index 0 is left out: its ratio is unbounded.
pub fn build_family_b(n: usize, t: usize) -> Result<Vec<FamilyEntry>> {
    MajorityParams::new(n, t)?;
    if n % 2 != 0 {
        return Err(Error::domain(format!("family B needs even N, got {n}")));
    }
    let half = n / 2;
    (1..t)
        .chain(half - t + 1..half)
        .map(|i| {
            let ratio = (n - 2 * i) as f64 / (std::f64::consts::SQRT_2 * i as f64);
            Ok(FamilyEntry { i: i as i64, ab: ABPair::from_ratio(ratio)? })
        })
        .collect()
}

/// Probability of outcome `+` when measuring the weight-`z` qubit.
pub fn rho_plus(n: usize, z: f64, ab: ABPair) -> f64 {
    let (a, b) = (ab.alpha(), ab.beta());
    let w = n as f64 - 2.0 * z;
    let num = a * z + b * w / std::f64::consts::SQRT_2;
    num * num / (2.0 * (a * a * z * z + b * b * w * w / 2.0))
}

/// [`rho_plus`] for family-B entry `i` in exact arithmetic. The `sqrt2`
/// factors cancel, so the value is rational for rational `z`.
pub fn rho_plus_b_exact(n: usize, i: usize, z: &BigRational) -> BigRational {
    let big = |v: i64| BigRational::from_integer(BigInt::from(v));
    let nn = big(n as i64);
    let ii = big(i as i64);
    let v = (&nn - big(2) * &ii) * z / &ii;
    let w = &nn - big(2) * z;
    let u = &v + &w;
    &u * &u / (big(2) * (&v * &v + &w * &w))
}

fn check_weight(n: usize, z: f64) -> Result<()> {
    if !(0.0..=n as f64).contains(&z) {
        return Err(Error::domain(format!("weight {z} outside [0, {n}]")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Transcripts

/// One trial of an elimination run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub k: u64,
    /// Indices measured in this trial, i.e. the set entering it.
    pub surviving: Vec<i64>,
    /// Number of `+` outcomes for each measured index, aligned with `surviving`.
    pub plus_counts: Vec<u64>,
}

/// Full record of one elimination run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElimTranscript {
    pub trials: Vec<TrialRecord>,
    pub queries: u64,
    pub stopped_at_trial: u64,
    pub output: u8,
}

impl ElimTranscript {
    pub fn output_bit(&self) -> bool {
        self.output == 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

// ---------------------------------------------------------------------------
// A-elimination

/// One sampled run of the A-elimination at weight `z`.
pub fn eliminate_a_sample<R: Rng + ?Sized>(
    params: &MajorityParams,
    z: f64,
    rng: &mut R,
    counter: &mut QueryCounter,
) -> Result<ElimTranscript> {
    check_weight(params.n, z)?;
    let family = build_family_a(params.n, params.t)?;
    let rhos: Vec<f64> = family.iter().map(|e| rho_plus(params.n, z, e.ab)).collect();
    let budget = params.budget();
    let mut alive: Vec<usize> = (0..family.len()).collect();
    let mut trials = Vec::new();
    let mut queries = 0u64;
    let mut k = 1u64;
    while !alive.is_empty() && queries < budget {
        let copies = params.copies_factor * k;
        let mut plus_counts = Vec::with_capacity(alive.len());
        let mut next = Vec::with_capacity(alive.len());
        for &pos in &alive {
            let plus = (0..copies).filter(|_| rng.gen::<f64>() < rhos[pos]).count() as u64;
            // ties count as elimination
            if 2 * plus > copies {
                next.push(pos);
            }
            plus_counts.push(plus);
        }
        let spent = copies * alive.len() as u64;
        queries += spent;
        counter.charge(spent);
        trials.push(TrialRecord {
            k,
            surviving: alive.iter().map(|&p| family[p].i).collect(),
            plus_counts,
        });
        alive = next;
        k += 1;
    }
    Ok(ElimTranscript {
        stopped_at_trial: trials.len() as u64,
        trials,
        queries,
        output: alive.is_empty() as u8,
    })
}

/// `Pr[Bin(n, p) = j]` for every `j` in `0..=n`.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    if p <= 0.0 {
        let mut v = vec![0.0; n_us + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n_us + 1];
        v[n_us] = 1.0;
        return v;
    }
    let mut ln_fact = vec![0.0f64; n_us + 1];
    for k in 1..=n_us {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n_us)
        .map(|j| {
            (ln_fact[n_us] - ln_fact[j] - ln_fact[n_us - j] + j as f64 * lp + (n_us - j) as f64 * lq)
                .exp()
        })
        .collect()
}

/// `Pr[Bin(n, p) > n/2]`, strictly more than half.
pub fn strict_majority_prob(n: u64, p: f64) -> f64 {
    let pmf = binomial_pmf(n, p);
    pmf.iter()
        .enumerate()
        .filter(|&(j, _)| 2 * j as u64 > n)
        .map(|(_, q)| q)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Exact output-1 probability of one A-elimination run at weight `z`.
///
/// Let `D_i` be the trial in which entry `i` is eliminated. The `D_i` are
/// independent, and an entry alive through trial `m` has been charged
/// `c m (m+1) / 2` queries (`c` the copies factor). The run outputs 1 iff all
/// entries die by some trial `K = max D_i` and trial `K` was started, i.e.
/// `sum_i c T(min(D_i, K-1)) < budget` with `T(m) = m(m+1)/2`. For each `K`
/// the sum is accumulated by a dynamic program over entries and integer
/// query totals below the budget.
pub fn eliminate_a_exact(params: &MajorityParams, z: f64) -> Result<f64> {
    check_weight(params.n, z)?;
    let family = build_family_a(params.n, params.t)?;
    if family.len() > MAX_EXACT_FAMILY {
        return Err(Error::capacity(format!(
            "family A has {} entries; exact evaluation supports {MAX_EXACT_FAMILY}",
            family.len()
        )));
    }
    let rhos: Vec<f64> = family.iter().map(|e| rho_plus(params.n, z, e.ab)).collect();
    let budget = params.budget();
    let c = params.copies_factor;
    let charged = |m: u64| c * m * (m + 1) / 2;
    // Largest K for which a single entry alive through K-1 trials fits the budget.
    let mut k_max = 1u64;
    while charged(k_max) < budget {
        k_max += 1;
    }

    // death[e][m] = Pr[D_e = m] for m in 1..=k_max
    let death: Vec<Vec<f64>> = rhos
        .iter()
        .map(|&rho| {
            let mut alive = 1.0;
            let mut d = vec![0.0; k_max as usize + 1];
            for m in 1..=k_max {
                let survive = strict_majority_prob(c * m, rho);
                d[m as usize] = alive * (1.0 - survive);
                alive *= survive;
            }
            d
        })
        .collect();

    let slots = budget as usize;
    let mut total = 0.0;
    for big_k in 1..=k_max {
        let cap = charged(big_k - 1) as usize;
        if cap >= slots {
            break;
        }
        // dist[flag][q]: flag = some entry dies exactly at K.
        let mut dist = [vec![0.0; slots], vec![0.0; slots]];
        dist[0][0] = 1.0;
        for d in &death {
            let mut next = [vec![0.0; slots], vec![0.0; slots]];
            for flag in 0..2 {
                for q in 0..slots {
                    let mass = dist[flag][q];
                    if mass == 0.0 {
                        continue;
                    }
                    for m in 1..big_k {
                        let nq = q + charged(m) as usize;
                        if nq < slots {
                            next[flag][nq] += mass * d[m as usize];
                        }
                    }
                    let nq = q + cap;
                    if nq < slots {
                        next[1][nq] += mass * d[big_k as usize];
                    }
                }
            }
            dist = next;
        }
        total += dist[1].iter().sum::<f64>();
    }
    Ok(total.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// B-elimination

/// One sampled run of the B-elimination at weight `z`.
pub fn eliminate_b_sample<R: Rng + ?Sized>(
    params: &MajorityParams,
    z: f64,
    rng: &mut R,
    counter: &mut QueryCounter,
) -> Result<ElimTranscript> {
    check_weight(params.n, z)?;
    let family = if params.t >= 2 { build_family_b(params.n, params.t)? } else { Vec::new() };
    let rhos: Vec<f64> = family.iter().map(|e| rho_plus(params.n, z, e.ab)).collect();
    let mut front = 0usize;
    let mut trials = Vec::new();
    for k in 1..=params.b_trials() {
        if front == family.len() {
            break;
        }
        let plus = rng.gen::<f64>() < rhos[front];
        counter.charge(1);
        trials.push(TrialRecord {
            k,
            surviving: family[front..].iter().map(|e| e.i).collect(),
            plus_counts: vec![plus as u64],
        });
        if !plus {
            front += 1;
        }
    }
    Ok(ElimTranscript {
        stopped_at_trial: trials.len() as u64,
        queries: trials.len() as u64,
        trials,
        output: (front == family.len()) as u8,
    })
}

/// Output-1 probability of the B-elimination given the `+` probability of
/// each entry in order. Removal is always at the front, so the state is
/// the number of entries removed so far.
pub fn b_elimination_dp<T>(plus_probs: &[T], trials: u64) -> T
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let len = plus_probs.len();
    let mut dist = vec![T::zero(); len + 1];
    dist[0] = T::one();
    for _ in 0..trials {
        let mut next = vec![T::zero(); len + 1];
        next[len] = dist[len].clone();
        for p in 0..len {
            if dist[p].is_zero() {
                continue;
            }
            let stay = dist[p].clone() * plus_probs[p].clone();
            let leave = dist[p].clone() * (T::one() - plus_probs[p].clone());
            next[p] = next[p].clone() + stay;
            next[p + 1] = next[p + 1].clone() + leave;
        }
        dist = next;
    }
    dist[len].clone()
}

/// Exact output-1 probability of the B-elimination at weight `z`.
pub fn eliminate_b_exact(params: &MajorityParams, z: f64) -> Result<f64> {
    check_weight(params.n, z)?;
    if params.t < 2 {
        return Ok(1.0);
    }
    let rhos: Vec<f64> = build_family_b(params.n, params.t)?
        .iter()
        .map(|e| rho_plus(params.n, z, e.ab))
        .collect();
    Ok(b_elimination_dp(&rhos, params.b_trials()).clamp(0.0, 1.0))
}

/// [`eliminate_b_exact`] in exact rational arithmetic.
pub fn eliminate_b_exact_rational(params: &MajorityParams, z: &BigRational) -> Result<BigRational> {
    let n = BigRational::from_integer(BigInt::from(params.n as i64));
    if z < &BigRational::zero() || z > &n {
        return Err(Error::domain(format!("weight {z} outside [0, {}]", params.n)));
    }
    if params.t < 2 {
        return Ok(BigRational::one());
    }
    let rhos: Vec<BigRational> = build_family_b(params.n, params.t)?
        .iter()
        .map(|e| rho_plus_b_exact(params.n, e.i as usize, z))
        .collect();
    Ok(b_elimination_dp(&rhos, params.b_trials()))
}

// ---------------------------------------------------------------------------
// Combined algorithm

/// Smallest odd `r >= 18 ln(2/eps)`: majority-of-`r` over runs with error at
/// most 1/3 then errs with probability at most `exp(-r/18) <= eps/2`.
pub fn amplification_reps(eps: f64) -> u64 {
    let r = (18.0 * (2.0 / eps).ln()).ceil().max(1.0) as u64;
    if r % 2 == 0 {
        r + 1
    } else {
        r
    }
}

/// Smallest `t` with `2^t >= 2/eps`.
pub fn t_for_eps(eps: f64) -> usize {
    let mut t = 0usize;
    while 2f64.powi(t as i32) * eps < 2.0 {
        t += 1;
    }
    t
}

/// Input to the combined Majority algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MajorityInput<'a> {
    /// A bit string; evaluated as `MAJ_{N+2}(01 x)` so that the weight is never 0.
    Bits(&'a [bool]),
    /// A (possibly real) Hamming weight over `n` bits; no prefix guard.
    Weight { n: usize, z: f64 },
}

/// How the combined algorithm will run for a given `(N, eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorityPlan {
    /// Bits actually fed to the elimination procedures (`N + 2` when guarded).
    pub n_eff: usize,
    pub t: usize,
    pub reps: u64,
    /// `t > n_eff / 4`: read all bits classically instead.
    pub fallback: bool,
}

impl MajorityPlan {
    pub fn new(n: usize, eps: f64, guarded: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("N must be positive"));
        }
        let lower = 2f64.powi(-(n as i32));
        if !(eps > lower && eps < 0.5) {
            return Err(Error::domain(format!("eps = {eps} outside (2^-{n}, 1/2)")));
        }
        let n_eff = if guarded { n + 2 } else { n };
        let t = t_for_eps(eps);
        Ok(Self { n_eff, t, reps: amplification_reps(eps), fallback: 4 * t > n_eff })
    }

    pub fn params(&self) -> Result<MajorityParams> {
        MajorityParams::new(self.n_eff, self.t)?.with_reps(self.reps)
    }
}

/// Result of one run of the combined algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorityRun {
    pub output: bool,
    pub queries: u64,
}

/// One sampled run of the combined Majority algorithm with error `eps`.
///
/// Runs the A-elimination `reps` times and takes the majority vote, runs the
/// B-elimination once, and outputs 1 iff both output 1.
pub fn majority_sample<R: Rng + ?Sized>(
    input: MajorityInput<'_>,
    eps: f64,
    rng: &mut R,
) -> Result<MajorityRun> {
    let (n, z_eff, plan) = match input {
        MajorityInput::Bits(x) => {
            let w = x.iter().filter(|&&b| b).count();
            (x.len(), (w + 1) as f64, MajorityPlan::new(x.len(), eps, true)?)
        }
        MajorityInput::Weight { n, z } => {
            check_weight(n, z)?;
            (n, z, MajorityPlan::new(n, eps, false)?)
        }
    };
    if plan.fallback {
        return Ok(MajorityRun { output: 2.0 * z_eff >= plan.n_eff as f64, queries: n as u64 });
    }
    let params = plan.params()?;
    let mut counter = QueryCounter::new();
    let mut ones = 0u64;
    for _ in 0..params.amplification_reps {
        ones += eliminate_a_sample(&params, z_eff, rng, &mut counter)?.output as u64;
    }
    let vote = 2 * ones > params.amplification_reps;
    let b = eliminate_b_sample(&params, z_eff, rng, &mut counter)?.output_bit();
    Ok(MajorityRun { output: vote && b, queries: counter.count() })
}

/// Exact probability that the combined algorithm outputs 1 at real weight
/// `z` over `n` bits.
pub fn majority_exact(n: usize, eps: f64, z: f64) -> Result<f64> {
    check_weight(n, z)?;
    let plan = MajorityPlan::new(n, eps, false)?;
    if plan.fallback {
        return Ok(if 2.0 * z >= n as f64 { 1.0 } else { 0.0 });
    }
    let params = plan.params()?;
    let vote = strict_majority_prob(params.amplification_reps, eliminate_a_exact(&params, z)?);
    Ok(vote * eliminate_b_exact(&params, z)?)
}

/// Exact output-1 probability of the majority vote over `reps` independent
/// A-elimination runs (no B-elimination).
pub fn amplified_a_exact(params: &MajorityParams, z: f64) -> Result<f64> {
    Ok(strict_majority_prob(params.amplification_reps, eliminate_a_exact(params, z)?))
}
