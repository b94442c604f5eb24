#![allow(dead_code)]

use std::path::PathBuf;

use svrp_core::instances;
use svrp_core::model::ServedTour;
use svrp_core::rational::int;
use svrp_core::{Demands, FixedTour, Metric, RTour, RecourseAction, ScenarioSet, StochVrpInstance};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Oracle-sized explicit instance (n <= 5, m <= 3, Q <= 2).
pub fn small_instance(seed: u64) -> StochVrpInstance {
    let n = 3 + (seed % 3) as usize;
    let m = 1 + ((seed / 3) % 3) as usize;
    let q = 1 + ((seed / 9) % 2) as u32;
    let lambda = [1, 2, 8][((seed / 18) % 3) as usize];
    instances::gen_random(n, m, q, int(lambda), 0.6, seed).unwrap()
}

pub fn rebuild_tour(metric: &Metric, t: &RTour) -> RTour {
    RTour::new(metric, t.seq().to_vec()).unwrap()
}

pub fn rebuild_fixed(metric: &Metric, f: &FixedTour) -> FixedTour {
    FixedTour::new(f.rtours().iter().map(|t| rebuild_tour(metric, t)).collect())
}

pub fn rebuild_action(metric: &Metric, a: &RecourseAction) -> RecourseAction {
    RecourseAction {
        served: a.served.clone(),
        recourse: a
            .recourse
            .iter()
            .map(|st| ServedTour { tour: rebuild_tour(metric, &st.tour), served: st.served.clone() })
            .collect(),
    }
}

pub fn with_scenarios(inst: &StochVrpInstance, scen: ScenarioSet) -> StochVrpInstance {
    StochVrpInstance::new(inst.metric.clone(), inst.capacity, inst.lambda, Demands::Scenarios(scen)).unwrap()
}
