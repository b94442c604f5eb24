use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use svrp_bench::{explicit, hardness};
use svrp_core::detvrp;
use svrp_core::indep::{self, IndepConfig};
use svrp_core::instances;
use svrp_core::oracle::{exact_stoch_vrp, OracleCaps};
use svrp_core::rational::int;
use svrp_core::recourse::recourse_for;
use svrp_core::setcover::{greedy_set_cover, SetCoverConfig};
use svrp_core::{Demands, FixedTour, RTour};

fn set_cover(c: &mut Criterion) {
    let mut g = c.benchmark_group("greedy_set_cover");
    for &(n, m) in &[(4, 2), (5, 3), (7, 6)] {
        let inst = explicit(n, m, 2, 11);
        g.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_m{m}")), &inst, |b, inst| {
            b.iter(|| greedy_set_cover(black_box(inst), &SetCoverConfig::default()).unwrap())
        });
    }
    let inst = hardness(6, 12, 3);
    g.bench_function("hardness_k2_u12", |b| b.iter(|| greedy_set_cover(black_box(&inst), &SetCoverConfig::default()).unwrap()));
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let inst = explicit(5, 3, 2, 5);
    c.bench_function("exact_stoch_vrp_n5_m3", |b| b.iter(|| exact_stoch_vrp(black_box(&inst), OracleCaps::default()).unwrap()));
}

fn recourse(c: &mut Criterion) {
    let inst = explicit(7, 1, 2, 9);
    let fixed = FixedTour::new(vec![RTour::through(&inst.metric, &[1, 2, 3])]);
    let q = inst.scenarios().unwrap().get(0).clone();
    c.bench_function("outlier_lp_recourse_n7", |b| b.iter(|| recourse_for(black_box(&inst), &fixed, &q).unwrap()));
}

fn vrp(c: &mut Criterion) {
    let inst = explicit(30, 1, 3, 2);
    let q = inst.scenarios().unwrap().get(0).clone();
    c.bench_function("approx_vrp_n30", |b| b.iter(|| detvrp::approx_vrp(&inst.metric, black_box(&q), 3).unwrap()));
}

fn independent(c: &mut Criterion) {
    let inst = instances::bernoulli_example(int(4));
    let Demands::Independent(dist) = &inst.demands else { unreachable!() };
    let cfg = IndepConfig { samples: 32, eval_samples: 50, ..Default::default() };
    c.bench_function("solve_indep_bernoulli4", |b| {
        b.iter(|| indep::solve_indep(&inst.metric, black_box(dist), inst.capacity, inst.lambda, &cfg).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = set_cover, oracle, recourse, vrp, independent
}
criterion_main!(benches);
