use proptest::prelude::*;
use rand::Rng;

use svrp_core::hst::{self, TreeMetric};
use svrp_core::kro::{self, KnapRankInstance, KroLpSolution};
use svrp_core::{instances, seed};

fn random_instance(n: usize, k: usize, s: u64) -> KnapRankInstance {
    let mut rng = seed::rng(s);
    let mut profits = Vec::new();
    let mut sizes = Vec::new();
    for _ in 0..k {
        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=3) as f64).collect();
        w[0] = 0.0;
        if w.iter().all(|&x| x == 0.0) {
            w[n - 1] = 1.0;
        }
        profits.push(w);
        sizes.push((0..n).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect());
    }
    KnapRankInstance::new(profits, sizes).unwrap()
}

fn setup(s: u64, n: usize, k: usize) -> (TreeMetric, KnapRankInstance, KroLpSolution) {
    let metric = instances::random_metric(n, seed::derive(s, 1)).unwrap();
    let inst = random_instance(n, k, seed::derive(s, 3));
    let tree = hst::embed(&metric, seed::derive(s, 2));
    let far = (0..n).map(|v| tree.tree_dist(metric.root(), v)).fold(0.0, f64::max);
    let sol = kro::solve_kro_lp(&tree, &inst, far).unwrap();
    (tree, inst, sol)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rounding_length_matches_lp(s in 0u64..5000, n in 4usize..8, k in 1usize..3) {
        let (tree, inst, sol) = setup(s, n, k);
        let lp_len: f64 = tree.edges().map(|e| tree.edge_len(e) * sol.x[e]).sum();
        prop_assert!(lp_len <= sol.budget / 2.0 + 1e-6);
        let mut rng = seed::rng(seed::derive(s, 9));
        let lens: Vec<f64> = (0..2000)
            .map(|_| tree.edges_length(&kro::gkr_round(&tree, &inst, &sol, &mut rng).unwrap().edges()))
            .collect();
        let (mean, se) = mean_sd(&lens);
        prop_assert!((mean - lp_len).abs() <= 4.0 * se + 1e-6, "mean {mean} lp {lp_len} se {se}");
    }

    #[test]
    fn rounding_profit_meets_floor(s in 0u64..5000, n in 4usize..8, k in 1usize..3) {
        let (tree, inst, sol) = setup(s, n, k);
        let ell = kro::tree_ell(&tree) as f64;
        let mut rng = seed::rng(seed::derive(s, 10));
        let profits: Vec<f64> = (0..2000)
            .map(|_| {
                let out = kro::gkr_round(&tree, &inst, &sol, &mut rng).unwrap();
                (0..inst.num_knapsacks()).map(|i| kro::rank_value(&inst, i, &out.altered[i])).sum()
            })
            .collect();
        let (mean, se) = mean_sd(&profits);
        prop_assert!(mean >= sol.value / (32.0 * ell) - 3.0 * se - 1e-9);
    }

    #[test]
    fn derandomization_never_loses_ratio(s in 0u64..5000, n in 4usize..8, k in 1usize..3) {
        let (tree, inst, sol) = setup(s, n, k);
        let out = kro::derandomize(&tree, &inst, &sol).unwrap();
        for step in &out.trajectory {
            let (gp, gd) = step.identity_gap();
            prop_assert!(gp <= 1e-6 * step.p.abs().max(1.0) && gd <= 1e-6 * step.d.abs().max(1.0));
            prop_assert!(step.ratio_after() >= step.ratio_before() * (1.0 - 1e-9) - 1e-12);
        }
    }

    #[test]
    fn partition_respects_capacity(sizes in prop::collection::vec(0.0f64..=1.0, 0..40), ell in 1usize..4) {
        let total: f64 = sizes.iter().sum();
        prop_assume!(total <= 4.0 * ell as f64);
        let parts = kro::greedy_partition(&sizes);
        prop_assert!(parts.len() <= 8 * ell);
        let mut seen = vec![false; sizes.len()];
        for p in &parts {
            prop_assert!(p.iter().map(|&i| sizes[i]).sum::<f64>() <= 1.0 + 1e-9);
            for &i in p {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        prop_assert!(seen.iter().all(|&b| b));
    }
}
