use proptest::prelude::*;

use svrp_core::hst::{embed, hierarchy};
use svrp_core::instances;
use svrp_core::rational;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_distances_dominate(seed in 0u64..10_000, n in 2usize..9) {
        let metric = instances::random_metric(n, seed).unwrap();
        let tree = embed(&metric, seed ^ 0x7);
        for u in 0..n {
            for v in 0..n {
                prop_assert!(tree.tree_dist(u, v) >= metric.df(u, v) - 1e-9);
            }
        }
    }

    #[test]
    fn level_lengths_halve(seed in 0u64..10_000, n in 2usize..9) {
        let metric = instances::random_metric(n, seed).unwrap();
        let h = hierarchy(&metric, seed ^ 0x9);
        for c in &h.clusters {
            if let Some(p) = c.parent {
                let parent = &h.clusters[p];
                prop_assert_eq!(parent.level, c.level + 1);
                if parent.parent.is_some() {
                    prop_assert!((parent.edge_len - 2.0 * c.edge_len).abs() <= 1e-9 * parent.edge_len.max(1.0));
                }
            }
        }
    }

    #[test]
    fn lifted_tour_at_most_twice_the_edges(seed in 0u64..10_000, n in 2usize..9, pick in 0u32..u32::MAX) {
        let metric = instances::random_metric(n, seed).unwrap();
        let tree = embed(&metric, seed ^ 0x11);
        // Root-connected edge set: the union of root paths of chosen points.
        let mut edges = Vec::new();
        for v in 0..n {
            if pick & (1 << v) != 0 {
                for e in tree.path_to_root(tree.node_of(v)) {
                    if e != 0 && !edges.contains(&e) {
                        edges.push(e);
                    }
                }
            }
        }
        edges.sort_unstable();
        let tour = tree.lift_tour(&metric, &edges).unwrap();
        prop_assert!(rational::to_f64(&tour.length()) <= 2.0 * tree.edges_length(&edges) + 1e-9);
    }
}
