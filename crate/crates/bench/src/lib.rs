//! Benchmark inputs shared by the criterion targets.

use svrp_core::instances;
use svrp_core::rational::int;
use svrp_core::StochVrpInstance;

/// Seeded explicit instance of the given shape.
pub fn explicit(n: usize, m: usize, capacity: u32, seed: u64) -> StochVrpInstance {
    instances::gen_random(n, m, capacity, int(2), 0.6, seed).expect("generator output is valid")
}

/// Hardness instance from a random bipartite graph on `2 * side` vertices.
pub fn hardness(side: usize, edges: usize, seed: u64) -> StochVrpInstance {
    let h = instances::random_k_partite(&[side, side], edges, seed);
    instances::gen_hardness(&h).expect("bipartite input is 2-uniform")
}
