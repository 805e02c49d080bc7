//! Exact feasibility of rational approximation at a fixed degree.
//!
//! `|P(x)/Q(x) - f(x)| <= eps` with `Q > 0` is linear in the coefficients
//! of `P` and `Q` once `Q` is normalized to `Q(x) >= 1`:
//!
//! ```text
//! Q(x) >= 1,   P(x) - (f(x) - eps) Q(x) >= 0,   (f(x) + eps) Q(x) - P(x) >= 0.
//! ```
//!
//! Feasibility is decided by a Phase-I simplex over `BigRational` with
//! Bland's rule. In symmetric mode the unknowns are the coefficients of
//! `P` and `Q` in the basis `C(w, j)` of binomials in the Hamming weight.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boolfn::{subset_indices, MultilinearPoly, PolyJson, TermJson, TruthTable};
use crate::error::{Error, Result};

pub const MAX_FULL_N: usize = 4;
pub const MAX_FULL_DEGREE: usize = 4;
pub const MAX_SYMMETRIC_N: usize = 64;
pub const MAX_SYMMETRIC_DEGREE: usize = 16;

/// Pivot limit; reaching it means the anti-cycling rule failed.
pub const MAX_PIVOTS: usize = 100_000;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `"num/den"`, an integer, or a finite decimal such as `"0.1"` into
/// an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::domain(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let v = BigRational::new(whole * &scale + frac, scale);
        return Ok(if negative { -v } else { v });
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

/// Converts an exact rational to the nearest `f64` (approximately).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn binomial(n: usize, k: usize) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

// ---------------------------------------------------------------------------
// Simplex

/// Phase-I simplex for `A v >= b` with `v` free. Returns a feasible `v` or
/// `None`.
fn phase_one(rows: &[Vec<BigRational>], rhs: &[BigRational]) -> Result<(Option<Vec<BigRational>>, usize)> {
    let m = rows.len();
    let nv = rows.first().map_or(0, |r| r.len());
    // columns: v+ (nv), v- (nv), surplus (m), artificials (one per row with b > 0)
    let art_rows: Vec<usize> = (0..m).filter(|&i| rhs[i].is_positive()).collect();
    let ncols = 2 * nv + m + art_rows.len();
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut b: Vec<BigRational> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut art_of_row = vec![None; m];
    for (k, &i) in art_rows.iter().enumerate() {
        art_of_row[i] = Some(2 * nv + m + k);
    }
    for i in 0..m {
        let mut row = vec![BigRational::zero(); ncols];
        // a v+ - a v- - s = b
        let sign = if rhs[i].is_positive() { int(1) } else { int(-1) };
        for j in 0..nv {
            if !rows[i][j].is_zero() {
                row[j] = &sign * &rows[i][j];
                row[nv + j] = -&row[j];
            }
        }
        row[2 * nv + i] = -&sign;
        b.push(&sign * &rhs[i]);
        match art_of_row[i] {
            Some(c) => {
                row[c] = int(1);
                basis[i] = c;
            }
            None => basis[i] = 2 * nv + i,
        }
        tab.push(row);
    }
    let first_art = 2 * nv + m;
    // reduced costs of "minimize sum of artificials"
    let mut cost = vec![BigRational::zero(); ncols];
    let mut obj = BigRational::zero();
    for &i in &art_rows {
        for j in 0..first_art {
            if !tab[i][j].is_zero() {
                cost[j] -= &tab[i][j];
            }
        }
        obj += &b[i];
    }
    let mut pivots = 0usize;
    loop {
        let Some(enter) = (0..ncols).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = &b[i] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::TheoremViolation("phase-one objective unbounded".into()));
        };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::TheoremViolation(format!("simplex exceeded {MAX_PIVOTS} pivots")));
        }
        let piv = tab[r][enter].clone();
        for v in tab[r].iter_mut() {
            if !v.is_zero() {
                *v /= &piv;
            }
        }
        b[r] /= &piv;
        let support: Vec<usize> = (0..ncols).filter(|&j| !tab[r][j].is_zero()).collect();
        let prow = tab[r].clone();
        let pb = b[r].clone();
        for i in 0..m {
            if i == r || tab[i][enter].is_zero() {
                continue;
            }
            let factor = tab[i][enter].clone();
            for &j in &support {
                let delta = &factor * &prow[j];
                tab[i][j] -= delta;
            }
            b[i] -= &factor * &pb;
        }
        if !cost[enter].is_zero() {
            let factor = cost[enter].clone();
            for &j in &support {
                let delta = &factor * &prow[j];
                cost[j] -= delta;
            }
            obj += &factor * &pb;
        }
        basis[r] = enter;
    }
    if !obj.is_zero() {
        return Ok((None, pivots));
    }
    let mut v = vec![BigRational::zero(); nv];
    for i in 0..m {
        let c = basis[i];
        if c < nv {
            v[c] += &b[i];
        } else if c < 2 * nv {
            v[c - nv] -= &b[i];
        }
    }
    Ok((Some(v), pivots))
}

// ---------------------------------------------------------------------------
// Witnesses

/// An explicit pair `(P, Q)` with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Multilinear polynomials as `(subset bitmask, coefficient)` lists.
    Multilinear { n: usize, p: Vec<(usize, BigRational)>, q: Vec<(usize, BigRational)> },
    /// Coefficients in the basis `C(|x|, j)`, `j = 0..`.
    Symmetric { n: usize, p: Vec<BigRational>, q: Vec<BigRational> },
}

fn eval_terms(terms: &[(usize, BigRational)], x: usize) -> BigRational {
    terms
        .iter()
        .filter(|(s, _)| s & x == *s)
        .fold(BigRational::zero(), |acc, (_, c)| acc + c)
}

fn eval_binomial(coeffs: &[BigRational], w: usize) -> BigRational {
    coeffs
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (j, c)| acc + c * binomial(w, j))
}

impl Witness {
    pub fn n(&self) -> usize {
        match self {
            Witness::Multilinear { n, .. } | Witness::Symmetric { n, .. } => *n,
        }
    }

    /// `(P(x), Q(x))` at bitmask `x` (`x_1` most significant).
    pub fn eval(&self, x: usize) -> (BigRational, BigRational) {
        match self {
            Witness::Multilinear { p, q, .. } => (eval_terms(p, x), eval_terms(q, x)),
            Witness::Symmetric { p, q, .. } => {
                let w = x.count_ones() as usize;
                (eval_binomial(p, w), eval_binomial(q, w))
            }
        }
    }

    pub fn degree(&self) -> usize {
        let deg_ml = |t: &[(usize, BigRational)]| {
            t.iter().filter(|(_, c)| !c.is_zero()).map(|(s, _)| s.count_ones() as usize).max().unwrap_or(0)
        };
        let deg_sym = |c: &[BigRational]| c.iter().rposition(|v| !v.is_zero()).unwrap_or(0);
        match self {
            Witness::Multilinear { p, q, .. } => deg_ml(p).max(deg_ml(q)),
            Witness::Symmetric { p, q, .. } => deg_sym(p).max(deg_sym(q)),
        }
    }

    /// Floating-point multilinear forms; symmetric witnesses are expanded
    /// over all subsets, so this is only sensible for small `N`.
    pub fn to_float_polys(&self) -> Result<(MultilinearPoly, MultilinearPoly)> {
        let n = self.n();
        let conv = |terms: Vec<(usize, f64)>| MultilinearPoly::from_terms(n, terms);
        match self {
            Witness::Multilinear { p, q, .. } => {
                let f = |t: &[(usize, BigRational)]| t.iter().map(|(s, c)| (*s, rational_to_f64(c))).collect();
                Ok((conv(f(p))?, conv(f(q))?))
            }
            Witness::Symmetric { p, q, .. } => {
                if n > crate::boolfn::MAX_EXTRACT_INPUTS {
                    return Err(Error::capacity(format!("expanding a symmetric witness over N = {n}")));
                }
                let f = |c: &[BigRational]| {
                    (0..1usize << n)
                        .filter_map(|s| c.get(s.count_ones() as usize).map(|v| (s, rational_to_f64(v))))
                        .filter(|(_, v)| *v != 0.0)
                        .collect()
                };
                Ok((conv(f(p))?, conv(f(q))?))
            }
        }
    }

    /// JSON with coefficients as exact fraction strings.
    pub fn to_json(&self) -> serde_json::Value {
        let poly = |n: usize, t: &[(usize, BigRational)]| PolyJson {
            n,
            terms: t
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(s, c)| TermJson { subset: subset_indices(*s, n), coeff: c.to_string() })
                .collect(),
        };
        match self {
            Witness::Multilinear { n, p, q } => json!({ "n": n, "p": poly(*n, p), "q": poly(*n, q) }),
            Witness::Symmetric { n, p, q } => {
                let s = |c: &[BigRational]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>();
                json!({ "n": n, "basis": "binomial", "p": s(p), "q": s(q) })
            }
        }
    }
}

/// Outcome of [`verify_witness`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub ok: bool,
    pub failure: Option<String>,
}

/// Checks `Q(x) > 0` and `|P(x)/Q(x) - f(x)| <= eps` on every input, in
/// exact arithmetic.
pub fn verify_witness(w: &Witness, f: &TruthTable, eps: &BigRational) -> WitnessCheck {
    if w.n() != f.n() {
        return WitnessCheck { ok: false, failure: Some("witness and f disagree on N".into()) };
    }
    for x in 0..1usize << f.n() {
        let Some(fx) = BigRational::from_float(f.value(x)) else {
            return WitnessCheck { ok: false, failure: Some(format!("f({x:#b}) is not finite")) };
        };
        let (p, q) = w.eval(x);
        if !q.is_positive() {
            return WitnessCheck { ok: false, failure: Some(format!("Q({x:#b}) = {q} is not positive")) };
        }
        if (&p - &fx * &q).abs() > eps * &q {
            return WitnessCheck {
                ok: false,
                failure: Some(format!("|P/Q - f| = {} exceeds eps at x = {x:#b}", (&p / &q - &fx).abs())),
            };
        }
    }
    WitnessCheck { ok: true, failure: None }
}

// ---------------------------------------------------------------------------
// Feasibility

#[derive(Debug, Clone, PartialEq)]
pub struct RdegResult {
    pub feasible: bool,
    pub degree: usize,
    pub eps: BigRational,
    pub symmetric: bool,
    pub witness: Option<Witness>,
    /// Always set: the `Q >= 1` normalization can miss sign-changing
    /// denominators, so infeasibility at `d` only shows `rdeg > d/2`.
    pub completeness_caveat: bool,
    /// `Some(k)` when the answer certifies `rdeg_eps(f) >= k`.
    pub certified_lower_bound: Option<usize>,
    pub pivots: usize,
}

impl RdegResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "feasible": self.feasible,
            "degree": self.degree,
            "eps": self.eps.to_string(),
            "symmetric": self.symmetric,
            "completeness_caveat": self.completeness_caveat,
            "certified_lower_bound": self.certified_lower_bound,
            "pivots": self.pivots,
            "witness": self.witness.as_ref().map(Witness::to_json),
        })
    }
}

/// Decides whether some `P/Q` of degree at most `d` with `Q >= 1` on the
/// cube approximates `f` within `eps`.
pub fn rdeg_feasible(f: &TruthTable, d: usize, eps: &BigRational, symmetric: bool) -> Result<RdegResult> {
    let n = f.n();
    if eps.is_negative() {
        return Err(Error::domain(format!("eps = {eps} is negative")));
    }
    let fvals: Vec<BigRational> = f
        .values()
        .iter()
        .map(|&v| BigRational::from_float(v).ok_or_else(|| Error::domain("f has non-finite values")))
        .collect::<Result<_>>()?;
    // one constraint block per point: (Q row, P row) over the unknowns
    let (points, monomials): (Vec<(Vec<BigRational>, BigRational)>, Vec<usize>) = if symmetric {
        if n > MAX_SYMMETRIC_N || d > MAX_SYMMETRIC_DEGREE {
            return Err(Error::capacity(format!(
                "symmetric mode supports N <= {MAX_SYMMETRIC_N}, d <= {MAX_SYMMETRIC_DEGREE}"
            )));
        }
        let profile = f
            .weight_profile()
            .ok_or_else(|| Error::domain("symmetric mode needs a symmetric f"))?;
        let k = d.min(n) + 1;
        let pts = (0..=n)
            .map(|w| {
                let fx = BigRational::from_float(profile[w]).expect("finite profile");
                ((0..k).map(|j| binomial(w, j)).collect(), fx)
            })
            .collect();
        (pts, (0..k).collect())
    } else {
        if n > MAX_FULL_N || d > MAX_FULL_DEGREE {
            return Err(Error::capacity(format!("full mode supports N <= {MAX_FULL_N}, d <= {MAX_FULL_DEGREE}")));
        }
        let monos: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() as usize <= d).collect();
        let pts = (0..1usize << n)
            .map(|x| {
                (
                    monos.iter().map(|&s| if s & x == s { int(1) } else { int(0) }).collect(),
                    fvals[x].clone(),
                )
            })
            .collect();
        (pts, monos)
    };
    let k = monomials.len();
    let mut rows = Vec::with_capacity(3 * points.len());
    let mut rhs = Vec::with_capacity(3 * points.len());
    // unknowns: P coefficients then Q coefficients
    for (basis, fx) in &points {
        let mut q_row = vec![BigRational::zero(); 2 * k];
        q_row[k..].clone_from_slice(basis);
        rows.push(q_row);
        rhs.push(int(1));
        let lo = fx - eps;
        let hi = fx + eps;
        let mut lower = vec![BigRational::zero(); 2 * k];
        let mut upper = vec![BigRational::zero(); 2 * k];
        for j in 0..k {
            lower[j] = basis[j].clone();
            lower[k + j] = -(&lo * &basis[j]);
            upper[j] = -basis[j].clone();
            upper[k + j] = &hi * &basis[j];
        }
        rows.push(lower);
        rhs.push(BigRational::zero());
        rows.push(upper);
        rhs.push(BigRational::zero());
    }
    let (solution, pivots) = phase_one(&rows, &rhs)?;
    let witness = solution.map(|v| {
        let (p, q) = v.split_at(k);
        if symmetric {
            Witness::Symmetric { n, p: p.to_vec(), q: q.to_vec() }
        } else {
            let pair = |c: &[BigRational]| monomials.iter().copied().zip(c.iter().cloned()).collect();
            Witness::Multilinear { n, p: pair(p), q: pair(q) }
        }
    });
    if let Some(w) = &witness {
        let check = verify_witness(w, f, eps);
        if !check.ok {
            return Err(Error::TheoremViolation(format!(
                "LP solution fails verification: {}",
                check.failure.unwrap_or_default()
            )));
        }
    }
    let feasible = witness.is_some();
    let certified_lower_bound = match (feasible, symmetric) {
        (false, false) => Some(d / 2 + 1),
        _ => None,
    };
    Ok(RdegResult {
        feasible,
        degree: d,
        eps: eps.clone(),
        symmetric,
        witness,
        completeness_caveat: true,
        certified_lower_bound,
        pivots,
    })
}

/// Result of [`scan_degree`]: the first feasible degree and every attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeScan {
    pub degree: Option<usize>,
    pub attempts: Vec<RdegResult>,
}

impl DegreeScan {
    pub fn witness(&self) -> Option<&Witness> {
        self.attempts.last().and_then(|r| r.witness.as_ref())
    }
}

/// Tries `d = 0, 1, ..., d_max` and stops at the first feasible degree.
pub fn scan_degree(f: &TruthTable, eps: &BigRational, d_max: usize, symmetric: bool) -> Result<DegreeScan> {
    let mut attempts = Vec::new();
    for d in 0..=d_max {
        let r = rdeg_feasible(f, d, eps, symmetric)?;
        let done = r.feasible;
        attempts.push(r);
        if done {
            return Ok(DegreeScan { degree: Some(d), attempts });
        }
    }
    Ok(DegreeScan { degree: None, attempts })
}
