//! Cross-module checks: LP witnesses through the compiler, the combined
//! Majority algorithm against its parts, and OR-demo extraction.

use postsel::boolfn::{extract_pq, ratio_check, TruthTable};
use postsel::compile::{compile_rational, roundtrip};
use postsel::majority::{
    eliminate_a_exact, eliminate_b_exact, majority_exact, majority_sample, MajorityInput, MajorityPlan,
};
use postsel::rdeg::{parse_rational, rational_to_f64, scan_degree};
use postsel::{replicate, OrDemo};
use proptest::prelude::*;

#[test]
fn lp_witnesses_survive_compile_and_extract() {
    for (f, eps) in [(TruthTable::or(3), "1/10"), (TruthTable::and(3), "1/10"), (TruthTable::or(2), "1/20")] {
        let eps_q = parse_rational(eps).unwrap();
        let scan = scan_degree(&f, &eps_q, 3, false).unwrap();
        let w = scan.witness().expect("feasible within degree 3");
        let (p, q) = w.to_float_polys().unwrap();
        let eps = rational_to_f64(&eps_q);
        let alg = compile_rational(&p, &q).unwrap();
        let pair = extract_pq(&alg).unwrap();
        assert!(pair.p.degree() <= 2 * w.degree() && pair.q.degree() <= 2 * w.degree());
        assert!(ratio_check(&pair.p, &pair.q, &f, eps).unwrap().ok);
        assert!(roundtrip(&f, &p, &q, eps).passed);
    }
}

// Output-1 probability of a strict majority among `r` independent coins.
fn vote(r: u64, p: f64) -> f64 {
    let mut total = 0.0;
    for k in r / 2 + 1..=r {
        let mut c = 1.0;
        for j in 0..k {
            c *= (r - j) as f64 / (j + 1) as f64;
        }
        total += c * p.powi(k as i32) * (1.0 - p).powi((r - k) as i32);
    }
    total
}

#[test]
fn combined_exact_is_vote_times_b() {
    let (n, eps) = (16, 0.25);
    let params = MajorityPlan::new(n, eps, false).unwrap().params().unwrap();
    for z in [2.0, 7.0, 8.0, 12.5] {
        let a = eliminate_a_exact(&params, z).unwrap();
        let b = eliminate_b_exact(&params, z).unwrap();
        let expected = vote(params.amplification_reps, a) * b;
        assert!((majority_exact(n, eps, z).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn combined_exact_matches_sampling() {
    let (n, eps, runs) = (16, 0.25, 4000u64);
    for (k, z) in [4.0, 7.0, 8.0].into_iter().enumerate() {
        let exact = majority_exact(n, eps, z).unwrap();
        let ones: u64 = replicate(runs, 11, k as u64, |rng| {
            majority_sample(MajorityInput::Weight { n, z }, eps, rng).unwrap().output as u64
        })
        .into_iter()
        .sum();
        let freq = ones as f64 / runs as f64;
        let sigma = (exact * (1.0 - exact) / runs as f64).sqrt();
        assert!((freq - exact).abs() <= 4.0 * sigma + 1e-3, "z = {z}: {freq} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn or_demo_acceptance_is_linear_in_weight(eps0 in 0.01f64..0.99, n in 1usize..6) {
        let demo = OrDemo::new(n, eps0).unwrap();
        let pair = extract_pq(&demo).unwrap();
        let slope = (1.0 - eps0 * eps0) / n as f64;
        for m in 0..1usize << n {
            let w = m.count_ones() as f64;
            prop_assert!((pair.q.eval_cube(m) - (eps0 * eps0 + slope * w)).abs() < 1e-9);
            prop_assert!((pair.p.eval_cube(m) - slope * w).abs() < 1e-9);
        }
        prop_assert!(pair.q.degree() <= 1);
    }
}
