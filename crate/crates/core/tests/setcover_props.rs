mod common;

use proptest::prelude::*;

use common::small_instance;
use svrp_core::oracle::{exact_stoch_vrp, OracleCaps};
use svrp_core::rational::{self, int};
use svrp_core::setcover::{build_ground_set, greedy_set_cover, SetCoverConfig};
use svrp_core::{evaluate_objective, Metric, Rational, StochVrpInstance};

fn brute_tsp(metric: &Metric, pts: &[usize]) -> Rational {
    fn go(metric: &Metric, at: usize, rest: &mut Vec<usize>) -> Rational {
        if rest.is_empty() {
            return metric.d(at, metric.root());
        }
        let mut best: Option<Rational> = None;
        for k in 0..rest.len() {
            let v = rest.remove(k);
            let c = metric.d(at, v) + go(metric, v, rest);
            rest.insert(k, v);
            if best.map_or(true, |b| c < b) {
                best = Some(c);
            }
        }
        best.unwrap()
    }
    go(metric, metric.root(), &mut pts.to_vec())
}

/// Minimum-cost cover of every (scenario, point) demand by first-stage
/// tours (cost d(T), any scenarios, load <= Q per scenario) and
/// second-stage tours (cost lambda/m d(T), one scenario, load <= Q).
fn set_cover_optimum(inst: &StochVrpInstance) -> Rational {
    let set = inst.scenarios().unwrap();
    let m = set.len() as i64;
    let elems: Vec<(usize, usize, u32)> = set
        .scenarios()
        .iter()
        .enumerate()
        .flat_map(|(i, q)| q.support().into_iter().map(move |v| (i, v, q.get(v))))
        .collect();
    let k = elems.len();
    let full = (1usize << k) - 1;
    let mut cost = vec![None; 1 << k];
    for e in 1..=full {
        let mut load = vec![0u32; set.len()];
        let mut pts = Vec::new();
        let mut scen = Vec::new();
        for b in 0..k {
            if e & (1 << b) != 0 {
                let (i, v, q) = elems[b];
                load[i] += q;
                if !pts.contains(&v) {
                    pts.push(v);
                }
                if !scen.contains(&i) {
                    scen.push(i);
                }
            }
        }
        if load.iter().any(|&l| l > inst.capacity) {
            continue;
        }
        let t = brute_tsp(&inst.metric, &pts);
        let second = inst.lambda * t / int(m);
        cost[e] = Some(if scen.len() == 1 && second < t { second } else { t });
    }
    let mut dp: Vec<Option<Rational>> = vec![None; 1 << k];
    dp[0] = Some(int(0));
    for mask in 0..full {
        let Some(base) = dp[mask] else { continue };
        let low = (!mask).trailing_zeros() as usize;
        let free = full & !mask;
        let mut sub = free;
        while sub > 0 {
            if sub & (1 << low) != 0 {
                if let Some(c) = cost[sub] {
                    let next = mask | sub;
                    let v = base + c;
                    if dp[next].map_or(true, |d| v < d) {
                        dp[next] = Some(v);
                    }
                }
            }
            sub = (sub - 1) & free;
        }
    }
    dp[full].unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn demands_served_exactly_once(seed in 0u64..5000) {
        let inst = small_instance(seed);
        let out = greedy_set_cover(&inst, &SetCoverConfig::default()).unwrap();
        let set = inst.scenarios().unwrap();
        prop_assert_eq!(out.ground_size, build_ground_set(set).len());
        for (i, (a, q)) in out.actions.iter().zip(set.scenarios()).enumerate() {
            a.validate(&inst.metric, &out.fixed, inst.capacity, i, q).unwrap();
            let mut count = vec![0; inst.metric.len()];
            for (v, _) in a.served.iter().flatten().chain(a.recourse.iter().flat_map(|t| t.served.iter())) {
                count[*v] += 1;
            }
            for v in inst.metric.customers() {
                prop_assert_eq!(count[v], usize::from(q.get(v) > 0));
            }
        }
        prop_assert_eq!(evaluate_objective(&inst, &out.fixed, &out.actions).unwrap(), out.total_cost);
    }

    #[test]
    fn cover_sandwich(seed in 0u64..5000) {
        let inst = small_instance(seed);
        let set = inst.scenarios().unwrap();
        prop_assume!(build_ground_set(set).len() <= 10);
        let opt = exact_stoch_vrp(&inst, OracleCaps::default()).unwrap().cost;
        let sc = set_cover_optimum(&inst);
        let out = greedy_set_cover(&inst, &SetCoverConfig::default()).unwrap();
        prop_assert!(opt <= sc);
        prop_assert!(sc <= out.total_cost);
        if let Some(g) = out.guarantee() {
            prop_assert!(rational::to_f64(&out.total_cost) <= g * rational::to_f64(&sc) + 1e-9);
        }
    }
}
