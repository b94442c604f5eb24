use proptest::prelude::*;
use rand::Rng;

use svrp_core::detvrp::flow_bound;
use svrp_core::indep::{draw_presence, exact_tree_term, overflow_frequency, sampled_tree_term};
use svrp_core::rational::{frac, int};
use svrp_core::{instances, seed, IndepDistribution, Rational};

fn random_dist(n: usize, capacity: u32, s: u64) -> IndepDistribution {
    let mut rng = seed::rng(s);
    let supports = (0..n)
        .map(|v| {
            if v == 0 {
                return vec![(0, int(1))];
            }
            let p = frac(rng.gen_range(0..=4), 4);
            vec![(0, int(1) - p), (rng.gen_range(1..=capacity), p)]
        })
        .collect();
    IndepDistribution::new(supports).unwrap()
}

fn binomial_tail(n: u64, limit: u64) -> f64 {
    // P(Bin(n, 1/2) > limit)
    let mut c = 1.0;
    let mut tail = 0.0;
    for k in 0..=n {
        if k > limit {
            tail += c;
        }
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    tail / 2f64.powi(n as i32)
}

#[test]
fn overflow_falls_with_copies() {
    let n = 11;
    let pts: Vec<usize> = (1..n).collect();
    let dist = IndepDistribution::bernoulli(n, &pts, 1, frac(1, 2)).unwrap();
    let trials = 4000;
    let freqs: Vec<f64> = [1, 2, 4, 8].iter().map(|&b| overflow_frequency(&dist, &pts, b, 2, trials, 3)).collect();
    for w in freqs.windows(2) {
        assert!(w[1] <= w[0]);
    }
    for (&b, &f) in [1u64, 2, 4, 8].iter().zip(&freqs) {
        let p = binomial_tail(10, 2 * b);
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * sd + 1e-12, "beta {b}: {f} vs {p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expected_flow_is_linear(s in 0u64..5000, n in 2usize..8, capacity in 1u32..4) {
        let metric = instances::random_metric(n, seed::derive(s, 0)).unwrap();
        let dist = random_dist(n, capacity, seed::derive(s, 1));
        let all: Vec<usize> = (0..n).collect();
        let by_outcome = dist
            .outcomes(1 << 12)
            .unwrap()
            .iter()
            .fold(Rational::from_integer(0), |acc, (q, p)| acc + *p * flow_bound(&metric, q, capacity, &all));
        let by_mean = metric
            .customers()
            .fold(Rational::from_integer(0), |acc, v| acc + metric.d(metric.root(), v) * dist.mean(v))
            / Rational::from_integer(capacity as i128);
        prop_assert_eq!(by_outcome, by_mean);
    }

    #[test]
    fn sampled_tree_term_converges(s in 0u64..5000, n in 3usize..8) {
        let metric = instances::random_metric(n, seed::derive(s, 0)).unwrap();
        let dist = random_dist(n, 2, seed::derive(s, 1));
        let in_d1: Vec<bool> = (0..n).map(|v| v % 3 == 1).collect();
        let exact = exact_tree_term(&metric, &dist, &in_d1).unwrap();
        let small = draw_presence(&dist, 4000, seed::derive(s, 2));
        let t = sampled_tree_term(&metric, &small, &in_d1);
        let diam = svrp_core::rational::to_f64(&metric.diameter());
        // Each sample lies in [0, (n - 1) diam]; Hoeffding at 4000 draws, failure odds 1e-6.
        let slack = (n - 1) as f64 * diam * (2e6f64.ln() / 8000.0).sqrt();
        prop_assert!((t - exact).abs() <= slack + 1e-9, "sampled {t} exact {exact} slack {slack}");
    }
}

#[test]
fn tree_term_error_shrinks() {
    let mut err_small = 0.0;
    let mut err_large = 0.0;
    for s in 0..20u64 {
        let metric = instances::random_metric(7, seed::derive(s, 0)).unwrap();
        let dist = random_dist(7, 2, seed::derive(s, 1));
        let none = vec![false; 7];
        let exact = exact_tree_term(&metric, &dist, &none).unwrap();
        err_small += (sampled_tree_term(&metric, &draw_presence(&dist, 50, s), &none) - exact).abs();
        err_large += (sampled_tree_term(&metric, &draw_presence(&dist, 3200, s), &none) - exact).abs();
    }
    assert!(err_large * 3.0 < err_small, "{err_large} vs {err_small}");
}
