mod common;

use proptest::prelude::*;
use rand::Rng;

use common::small_instance;
use svrp_core::oracle::exact_recourse;
use svrp_core::rational::int;
use svrp_core::reduction::{normalize_fixed_tour, sampled_objective, EmpiricalSampler};
use svrp_core::{seed, FixedTour, RTour, Rational, StochVrpInstance};

fn exact_objective(inst: &StochVrpInstance, fixed: &FixedTour) -> Rational {
    let set = inst.scenarios().unwrap();
    let rec = set
        .scenarios()
        .iter()
        .map(|q| exact_recourse(&inst.metric, fixed, q, inst.capacity).unwrap().1)
        .fold(int(0), |a, b| a + b);
    fixed.total_length() + inst.lambda * rec / int(set.len() as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_never_hurts(s in 0u64..5000, extra in 1usize..4) {
        let inst = small_instance(s);
        let n = inst.metric.len();
        let mut rng = seed::rng(seed::derive(s, 5));
        let customers = n - 1;
        let tours: Vec<RTour> = (0..customers + extra)
            .map(|_| {
                let pts: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.4)).collect();
                RTour::through(&inst.metric, &pts)
            })
            .collect();
        let fixed = FixedTour::new(tours);
        let norm = normalize_fixed_tour(&inst.metric, &fixed);
        prop_assert!(norm.len() <= customers);
        prop_assert!(norm.total_length() <= fixed.total_length());
        prop_assert!(exact_objective(&inst, &norm) <= exact_objective(&inst, &fixed));
    }
}

#[test]
fn standard_error_shrinks_with_samples() {
    let mut checked = 0;
    for s in 0..40u64 {
        let inst = small_instance(s);
        let set = inst.scenarios().unwrap().clone();
        let base = FixedTour::new(vec![RTour::through(&inst.metric, &[1])]);
        let mut sampler = EmpiricalSampler { scenarios: set };
        let (_, se1) = sampled_objective(&inst.metric, inst.capacity, inst.lambda, &base, &mut sampler, 400, s).unwrap();
        let (_, se4) = sampled_objective(&inst.metric, inst.capacity, inst.lambda, &base, &mut sampler, 1600, s + 1).unwrap();
        if se1 > 1e-6 {
            let r = se1 / se4;
            assert!((1.6..=2.5).contains(&r), "seed {s}: ratio {r}");
            checked += 1;
        }
    }
    assert!(checked >= 10);
}
