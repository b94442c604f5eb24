use proptest::prelude::*;

use svrp_core::detvrp::{self, lower_bounds, routes_length};
use svrp_core::instances;
use svrp_core::oracle::exact_vrp;
use svrp_core::rational::int;
use svrp_core::DemandVector;

fn demands(n: usize, capacity: u32, seed: u64) -> DemandVector {
    use rand::Rng;
    let mut rng = svrp_core::seed::rng(seed);
    let mut q = DemandVector::zeros(n);
    for v in 1..n {
        if rng.gen_bool(0.7) {
            q.set(v, rng.gen_range(1..=capacity));
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vrp_between_bounds_and_oracle(seed in 0u64..10_000, n in 2usize..=7, capacity in 1u32..=3) {
        let metric = instances::random_metric(n, seed).unwrap();
        let q = demands(n, capacity, seed ^ 0xD);
        let routes = detvrp::approx_vrp_routes(&metric, &q, capacity).unwrap();
        let cost = routes_length(&routes);
        let lb = lower_bounds(&metric, &q, capacity);
        prop_assert!(cost >= lb.best());
        prop_assert!(cost <= int(4) * (lb.mst + lb.flow));
        for r in &routes {
            let load: u32 = r.points.iter().map(|&v| q.get(v)).sum();
            prop_assert!(load <= capacity);
            for &v in &r.points {
                prop_assert!(r.tour.visits(v));
            }
        }
        let (_, opt) = exact_vrp(&metric, &q, capacity).unwrap();
        prop_assert!(opt >= lb.best());
        prop_assert!(cost >= opt);
        prop_assert!(cost <= int(4) * opt);
    }
}
