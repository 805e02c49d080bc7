//! Rational approximations to `sgn` and `|x|`: Newman's classic product
//! construction, and the approximant obtained from the postselected
//! Majority algorithm evaluated at real weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majority::{amplification_reps, amplified_a_exact, MajorityParams, MAX_EXACT_FAMILY};

/// Above this degree the Newman product is accumulated in log form.
pub const LOG_FORM_DEGREE: usize = 200;

/// `e^{-1/sqrt d}`.
pub fn newman_base(d: usize) -> f64 {
    (-1.0 / (d as f64).sqrt()).exp()
}

/// The nodes `a^k`, `k = 0..d`, where `newman_r` is exactly 1.
pub fn newman_nodes(d: usize) -> Vec<f64> {
    let a = newman_base(d);
    (0..d).map(|k| a.powi(k as i32)).collect()
}

/// Newman's `r(x) = (p(x) - p(-x)) / (p(x) + p(-x))` with
/// `p(x) = prod_{k<d} (a^k + x)`.
///
/// Computed as `(1 - q) / (1 + q)` with `q = p(-x)/p(x)` for `x >= 0`, which
/// never underflows the way the raw products do near `x = 0`; negative `x`
/// use `r(-x) = -r(x)`.
pub fn newman_r(d: usize, x: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::domain(format!("degree {d} below 2")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside [-1, 1]")));
    }
    if x < 0.0 {
        return Ok(-newman_r(d, -x)?);
    }
    let nodes = newman_nodes(d);
    let q = if d > LOG_FORM_DEGREE {
        let (mut log_mag, mut negative) = (0.0f64, false);
        for &ak in &nodes {
            let f = (ak - x) / (ak + x);
            if f == 0.0 {
                return Ok(1.0);
            }
            negative ^= f < 0.0;
            log_mag += f.abs().ln();
        }
        let m = log_mag.exp();
        if negative {
            -m
        } else {
            m
        }
    } else {
        nodes.iter().map(|&ak| (ak - x) / (ak + x)).product()
    };
    let den = 1.0 + q;
    if den.abs() < 1e-300 {
        return Err(Error::NumericalUnderflow(format!("p(x) + p(-x) vanishes at x = {x}")));
    }
    Ok((1.0 - q) / den)
}

/// `x * newman_r(d, x)`, approximating `|x|`.
pub fn newman_abs(d: usize, x: f64) -> Result<f64> {
    Ok(x * newman_r(d, x)?)
}

/// Sign convention used by the approximants: `sgn(0) = 1`.
pub fn sgn(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Which part of the domain a grid point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    /// Error bounds are asserted here.
    Assertable,
    /// Values are computed and reported only.
    ReportOnly,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Assertable => "assertable",
            DomainTag::ReportOnly => "report_only",
        }
    }
}

/// Sign approximant induced by the amplified A-elimination with `t = 1`
/// over `N = ceil(2/eps)` bits: `s(z) = 2 Pr[output 1 at weight N(z+1)/2] - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignApproximant {
    pub eps: f64,
    pub n: usize,
    pub params: MajorityParams,
}

impl SignApproximant {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::domain(format!("eps = {eps} outside (0, 1/2)")));
        }
        let n = (2.0 / eps).ceil() as usize;
        let params = MajorityParams::new(n, 1)?.with_reps(amplification_reps(eps))?;
        let family = 2 * params.log_ratio() as usize + 1;
        if family > MAX_EXACT_FAMILY {
            return Err(Error::capacity(format!(
                "N = {n} gives {family} family-A entries; exact evaluation supports {MAX_EXACT_FAMILY}"
            )));
        }
        Ok(Self { eps, n, params })
    }

    /// Real weight fed to the Majority algorithm at `z`.
    pub fn weight(&self, z: f64) -> f64 {
        self.n as f64 * (z + 1.0) / 2.0
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&z) {
            return Err(Error::domain(format!("z = {z} outside [-1, 1]")));
        }
        let w = self.weight(z).clamp(0.0, self.n as f64);
        Ok((2.0 * amplified_a_exact(&self.params, w)? - 1.0).clamp(-1.0, 1.0))
    }

    /// `z * s(z)`, approximating `|z|`.
    pub fn abs(&self, z: f64) -> Result<f64> {
        Ok(z * self.eval(z)?)
    }

    /// Points mapped to weights in `[1, N/2 - 1] ∪ [N/2, N]` are assertable.
    pub fn tag(&self, z: f64) -> DomainTag {
        let n = self.n as f64;
        let lo = -1.0 + 2.0 / n;
        let hi = -2.0 / n;
        if (z >= lo - 1e-12 && z <= hi + 1e-12) || z >= 0.0 {
            DomainTag::Assertable
        } else {
            DomainTag::ReportOnly
        }
    }

    /// `count` points on the assertable domain, split evenly between the
    /// negative and the nonnegative piece, plus `extra` report-only points
    /// in `[-1, -1 + 2/N)`.
    pub fn grid(&self, count: usize, extra: usize) -> Vec<f64> {
        let n = self.n as f64;
        let neg = count / 2;
        let mut g = uniform_grid(-1.0 + 2.0 / n, -2.0 / n, neg);
        g.extend(uniform_grid(0.0, 1.0, count - neg));
        if extra > 0 {
            let step = 2.0 / n / extra as f64;
            g.extend((0..extra).map(|k| -1.0 + k as f64 * step));
        }
        g
    }
}

pub fn quantum_sign(eps: f64) -> Result<SignApproximant> {
    SignApproximant::new(eps)
}

pub fn quantum_abs(eps: f64, z: f64) -> Result<f64> {
    SignApproximant::new(eps)?.abs(z)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub z: f64,
    pub value: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub domain: DomainTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    /// Maximum error over assertable rows.
    pub max_error: f64,
    pub argmax: f64,
    /// Maximum error over report-only rows (0 if there are none).
    pub report_only_max_error: f64,
}

impl GridReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,value,reference,abs_error,domain_tag\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.z,
                r.value,
                r.reference,
                r.abs_error,
                r.domain.as_str()
            ));
        }
        s
    }
}

/// Evaluates `evaluator` and `reference` on `points` (sorted, deduplicated)
/// and tracks the largest deviation per domain tag.
pub fn error_grid<E, F, T>(evaluator: E, reference: F, points: &[f64], tag: T) -> Result<GridReport>
where
    E: Fn(f64) -> Result<f64> + Sync,
    F: Fn(f64) -> f64 + Sync,
    T: Fn(f64) -> DomainTag + Sync,
{
    if points.len() < 2 {
        return Err(Error::domain("grid needs at least 2 points"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let rows: Vec<GridRow> = pts
        .par_iter()
        .map(|&z| {
            let value = evaluator(z)?;
            let reference = reference(z);
            Ok(GridRow { z, value, reference, abs_error: (value - reference).abs(), domain: tag(z) })
        })
        .collect::<Result<_>>()?;
    let first_assertable = rows.iter().find(|r| r.domain == DomainTag::Assertable).map_or(pts[0], |r| r.z);
    let (mut max_error, mut argmax, mut report_only_max_error) = (0.0f64, first_assertable, 0.0f64);
    for r in &rows {
        match r.domain {
            DomainTag::Assertable if r.abs_error > max_error => {
                max_error = r.abs_error;
                argmax = r.z;
            }
            DomainTag::ReportOnly => report_only_max_error = report_only_max_error.max(r.abs_error),
            _ => {}
        }
    }
    Ok(GridReport { rows, max_error, argmax, report_only_max_error })
}

/// Grid report of `newman_abs(d, .)` against `|x|`: `points` uniform points
/// on `[-1, 1]` together with the nodes `±a^k`.
pub fn newman_abs_grid(d: usize, points: usize) -> Result<GridReport> {
    let mut pts = uniform_grid(-1.0, 1.0, points);
    for a in newman_nodes(d) {
        pts.push(a);
        pts.push(-a);
    }
    error_grid(|x| newman_abs(d, x), f64::abs, &pts, |_| DomainTag::Assertable)
}

/// Least-squares fit of `ln E = intercept + slope * sqrt(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln E`.
    pub residual: f64,
}

pub fn fit_decay(points: &[(usize, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!("decay fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(d, e)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::domain(format!("nonpositive error {e} at d = {d}")));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).sqrt()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("decay fit needs at least two distinct degrees"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(DecayFit { slope, intercept, residual: (sse / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_value() {
        assert!((newman_base(16) - 0.778_800_783_071_404_9).abs() < 1e-15);
    }

    #[test]
    fn exact_at_nodes() {
        for d in [2usize, 16, 64, 250] {
            for a in newman_nodes(d) {
                assert!((newman_r(d, a).unwrap() - 1.0).abs() < 1e-12);
                assert!((newman_r(d, -a).unwrap() + 1.0).abs() < 1e-12);
            }
        }
    }

    /// Direct evaluation of the defining products as an oracle.
    fn r_by_products(d: usize, x: f64) -> f64 {
        let a = newman_base(d);
        let p = |y: f64| (0..d).map(|k| a.powi(k as i32) + y).product::<f64>();
        (p(x) - p(-x)) / (p(x) + p(-x))
    }

    #[test]
    fn matches_raw_products() {
        for d in [2usize, 5, 16, 36] {
            for k in 0..=200 {
                let x = -1.0 + k as f64 / 100.0;
                assert!((newman_r(d, x).unwrap() - r_by_products(d, x)).abs() < 1e-12, "d={d} x={x}");
            }
        }
    }

    #[test]
    fn log_form_agrees_with_direct_form() {
        // evaluate a d > 200 product both ways by hand
        let d = 256;
        for k in 1..=50 {
            let x = k as f64 / 50.0;
            let direct: f64 = newman_nodes(d).iter().map(|&a| (a - x) / (a + x)).product();
            let r = (1.0 - direct) / (1.0 + direct);
            assert!((newman_r(d, x).unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_properties() {
        for d in [4usize, 16, 100] {
            for k in 1..=1000 {
                let x = k as f64 / 1000.0;
                let r = newman_r(d, x).unwrap();
                assert!(r > 0.0, "d={d} x={x} r={r:e}");
                assert_eq!(newman_r(d, -x).unwrap(), -r);
            }
        }
        assert_eq!(newman_r(16, 0.0).unwrap(), 0.0);
        assert_eq!(newman_abs(16, 0.0).unwrap(), 0.0);
        assert!((newman_abs(16, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(newman_r(16, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn overshoots_one_just_past_a_node() {
        // an odd number of factors a^k - x are negative, so p(-x) < 0 and r > 1
        let d = 4;
        let x = newman_nodes(d)[3] + 1e-3;
        let r = newman_r(d, x).unwrap();
        assert!(r > 1.0 && r < 1.001, "{r}");
        let q: f64 = newman_nodes(d).iter().map(|&a| (a - x) / (a + x)).product();
        assert!(q < 0.0);
        // the overshoot is what the sign error bound allows
        for d in [16usize, 36, 64, 100] {
            let worst = uniform_grid(0.0, 1.0, 10_001)
                .into_iter()
                .map(|x| newman_r(d, x).unwrap() - 1.0)
                .fold(f64::MIN, f64::max);
            assert!(worst < (-0.5 * (d as f64).sqrt()).exp());
        }
    }

    #[test]
    fn abs_grid_d36() {
        let rep = newman_abs_grid(36, 10_000).unwrap();
        assert!(rep.max_error <= (-3f64).exp(), "{}", rep.max_error);
        assert_eq!(rep, newman_abs_grid(36, 10_000).unwrap());
    }

    #[test]
    fn decay_fit() {
        let pts: Vec<(usize, f64)> = [4usize, 9, 16, 25].iter().map(|&d| (d, (-(d as f64).sqrt()).exp())).collect();
        let fit = fit_decay(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12 && fit.residual < 1e-12);
        assert!(fit_decay(&pts[..2]).is_err());
        assert!(fit_decay(&[(1, 0.1), (4, 0.0), (9, 0.01)]).is_err());
    }

    #[test]
    fn constant_grid() {
        let pts = uniform_grid(-1.0, 1.0, 11);
        let rep = error_grid(|_| Ok(0.5), |_| 0.5, &pts, |_| DomainTag::Assertable).unwrap();
        assert_eq!(rep.max_error, 0.0);
        assert_eq!(rep.rows.len(), 11);
        assert!(error_grid(|_| Ok(0.5), |_| 0.5, &[0.0], |_| DomainTag::Assertable).is_err());
    }

    #[test]
    fn sign_approximant_setup() {
        let s = quantum_sign(1.0 / 16.0).unwrap();
        assert_eq!(s.n, 32);
        assert_eq!(2 * s.params.log_ratio() + 1, 11);
        assert_eq!(s.tag(-1.0), DomainTag::ReportOnly);
        assert_eq!(s.tag(-1.0 + 1.0 / 16.0), DomainTag::Assertable);
        assert_eq!(s.tag(-0.03), DomainTag::ReportOnly);
        assert_eq!(s.tag(0.0), DomainTag::Assertable);
        // N = 1000 needs 21 entries
        assert!(matches!(quantum_sign(0.002), Err(Error::Capacity(_))));
    }

    #[test]
    fn sign_approximant_values() {
        let s = quantum_sign(1.0 / 16.0).unwrap();
        assert!((s.eval(1.0).unwrap() - 1.0).abs() <= s.eps);
        assert!((s.eval(0.0).unwrap() - 1.0).abs() <= s.eps);
        assert!((s.eval(-0.5).unwrap() + 1.0).abs() <= s.eps);
        assert_eq!(s.abs(0.0).unwrap(), 0.0);
        for z in [-1.0, -0.99, 0.01] {
            let v = s.eval(z).unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
    }
}
