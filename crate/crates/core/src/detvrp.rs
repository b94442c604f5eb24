//! Deterministic VRP primitives: MST and flow lower bounds, MST-doubling
//! TSP, and route-first/cluster-second tour partitioning.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{DemandVector, Metric, RTour};
use crate::rational::{self, Rational};

/// Classical lower bounds on any unsplittable VRP solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VrpLowerBounds {
    pub mst: Rational,
    pub flow: Rational,
}

impl VrpLowerBounds {
    pub fn best(&self) -> Rational {
        self.mst.max(self.flow)
    }
}

/// A route together with the points whose demand it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct VrpRoute {
    pub tour: RTour,
    pub points: Vec<usize>,
}

fn with_root(metric: &Metric, pts: &[usize]) -> Vec<usize> {
    let mut nodes = vec![metric.root()];
    let mut rest: Vec<usize> = pts.iter().copied().filter(|&p| p != metric.root()).collect();
    rest.sort_unstable();
    rest.dedup();
    nodes.extend(rest);
    nodes
}

/// Prim's algorithm on `{r} ∪ pts`; returns `(parent, child)` edges in the
/// order vertices join the tree. Ties go to the smaller point id.
pub fn mst_edges(metric: &Metric, pts: &[usize]) -> Vec<(usize, usize)> {
    let nodes = with_root(metric, pts);
    let k = nodes.len();
    let mut in_tree = vec![false; k];
    let mut key: Vec<Option<Rational>> = vec![None; k];
    let mut parent = vec![0usize; k];
    in_tree[0] = true;
    for j in 1..k {
        key[j] = Some(metric.d(nodes[0], nodes[j]));
    }
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    for _ in 1..k {
        let mut best: Option<usize> = None;
        for j in 1..k {
            if in_tree[j] {
                continue;
            }
            match best {
                None => best = Some(j),
                Some(b) if key[j] < key[b] => best = Some(j),
                _ => {}
            }
        }
        let j = best.expect("non-empty frontier");
        in_tree[j] = true;
        edges.push((nodes[parent[j]], nodes[j]));
        for t in 1..k {
            if !in_tree[t] {
                let d = metric.d(nodes[j], nodes[t]);
                if key[t].map_or(true, |cur| d < cur) {
                    key[t] = Some(d);
                    parent[t] = j;
                }
            }
        }
    }
    edges
}

/// Exact MST length on `{r} ∪ pts`.
pub fn mst_length(metric: &Metric, pts: &[usize]) -> Rational {
    mst_edges(metric, pts)
        .iter()
        .map(|&(u, v)| metric.d(u, v))
        .fold(Rational::zero(), |a, b| a + b)
}

/// `(1/Q) * sum_{v in T} q_v d(r, v)`.
pub fn flow_bound(metric: &Metric, demands: &DemandVector, capacity: u32, pts: &[usize]) -> Rational {
    let r = metric.root();
    let total = pts
        .iter()
        .fold(Rational::zero(), |acc, &v| acc + metric.d(r, v) * Rational::from(demands.get(v) as i128));
    total / Rational::from(capacity as i128)
}

pub fn lower_bounds(metric: &Metric, demands: &DemandVector, capacity: u32) -> VrpLowerBounds {
    let support = demands.support();
    VrpLowerBounds {
        mst: mst_length(metric, &support),
        flow: flow_bound(metric, demands, capacity, &support),
    }
}

/// Preorder of the MST on `{r} ∪ pts` from the root, children by ascending
/// id; the root itself is omitted.
pub fn tsp_order(metric: &Metric, pts: &[usize]) -> Vec<usize> {
    let edges = mst_edges(metric, pts);
    let n = metric.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, c) in &edges {
        children[p].push(c);
    }
    for ch in &mut children {
        ch.sort_unstable();
    }
    let mut order = Vec::with_capacity(edges.len());
    let mut stack = vec![metric.root()];
    while let Some(u) = stack.pop() {
        if u != metric.root() {
            order.push(u);
        }
        for &c in children[u].iter().rev() {
            stack.push(c);
        }
    }
    order
}

/// MST doubling with shortcutting: length at most `2 * MST({r} ∪ pts)`.
pub fn approx_tsp(metric: &Metric, pts: &[usize]) -> RTour {
    RTour::through(metric, &tsp_order(metric, pts))
}

/// Optimal split of a fixed visiting order into capacity-feasible
/// consecutive segments, each closed through the depot. Returns segments
/// as index ranges into `order`.
pub fn split_order(metric: &Metric, order: &[usize], loads: &[Rational], capacity: Rational) -> Vec<(usize, usize)> {
    let k = order.len();
    let r = metric.root();
    let mut best: Vec<Option<Rational>> = vec![None; k + 1];
    let mut cut = vec![0usize; k + 1];
    best[0] = Some(Rational::zero());
    for j in 1..=k {
        let mut load = Rational::zero();
        let mut inner = Rational::zero();
        // Segment order[i..j], grown leftwards.
        for i in (0..j).rev() {
            load += loads[i];
            if load > capacity {
                break;
            }
            if i + 1 < j {
                inner += metric.d(order[i], order[i + 1]);
            }
            let Some(prev) = best[i] else { continue };
            let cost = prev + metric.d(r, order[i]) + inner + metric.d(order[j - 1], r);
            if best[j].map_or(true, |b| cost < b || (cost == b && i > cut[j])) {
                best[j] = Some(cost);
                cut[j] = i;
            }
        }
    }
    let mut segments = Vec::new();
    let mut j = k;
    while j > 0 {
        let i = cut[j];
        segments.push((i, j));
        j = i;
    }
    segments.reverse();
    segments
}

/// Tour partitioning for arbitrary (possibly fractional) loads `<= capacity`.
pub fn approx_vrp_loads(metric: &Metric, loads: &[(usize, Rational)], capacity: Rational) -> Result<Vec<VrpRoute>> {
    let mut load_of = vec![Rational::zero(); metric.len()];
    let mut pts = Vec::new();
    for &(v, q) in loads {
        if q > capacity {
            return Err(Error::InvalidDemand(format!("load at point {v} exceeds capacity")));
        }
        if q > Rational::zero() && v != metric.root() {
            load_of[v] += q;
            pts.push(v);
        }
    }
    pts.sort_unstable();
    pts.dedup();
    if pts.iter().any(|&v| load_of[v] > capacity) {
        return Err(Error::InvalidDemand("aggregated load exceeds capacity".into()));
    }
    let order = tsp_order(metric, &pts);
    let seg_loads: Vec<Rational> = order.iter().map(|&v| load_of[v]).collect();
    Ok(split_order(metric, &order, &seg_loads, capacity)
        .into_iter()
        .map(|(i, j)| {
            let points = order[i..j].to_vec();
            VrpRoute { tour: RTour::through(metric, &points), points }
        })
        .collect())
}

/// Unsplittable VRP routes for integral demands.
pub fn approx_vrp_routes(metric: &Metric, demands: &DemandVector, capacity: u32) -> Result<Vec<VrpRoute>> {
    for v in demands.support() {
        if demands.get(v) > capacity {
            return Err(Error::DemandExceedsCapacity { point: v, demand: demands.get(v), capacity });
        }
    }
    let loads: Vec<(usize, Rational)> = demands
        .support()
        .into_iter()
        .map(|v| (v, Rational::from(demands.get(v) as i128)))
        .collect();
    approx_vrp_loads(metric, &loads, Rational::from(capacity as i128))
}

pub fn approx_vrp(metric: &Metric, demands: &DemandVector, capacity: u32) -> Result<Vec<RTour>> {
    Ok(approx_vrp_routes(metric, demands, capacity)?.into_iter().map(|r| r.tour).collect())
}

pub fn routes_length(routes: &[VrpRoute]) -> Rational {
    rational::sum(routes.iter().map(|r| r.tour.length_ref()))
}

/// Lower bound on any StochVRP objective with `lambda >= 1`: the fixed
/// tour plus each scenario's recourse is a VRP solution for that scenario.
pub fn stoch_lower_bound(metric: &Metric, scenarios: &[DemandVector], capacity: u32) -> Rational {
    if scenarios.is_empty() {
        return Rational::zero();
    }
    let total = scenarios
        .iter()
        .map(|q| lower_bounds(metric, q, capacity).best())
        .fold(Rational::zero(), |a, b| a + b);
    total / Rational::from_integer(scenarios.len() as i128)
}

/// `cost / (mst + flow)`; `None` when both bounds vanish.
pub fn certified_ratio(cost: Rational, bounds: &VrpLowerBounds) -> Option<Rational> {
    let denom = bounds.mst + bounds.flow;
    if denom.is_zero() {
        None
    } else {
        Some(cost / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{core_instance, tri_metric};
    use crate::rational::int;

    #[test]
    fn mst_on_triangle() {
        let m = tri_metric();
        assert_eq!(mst_length(&m, &[1, 2]), int(2));
        assert_eq!(mst_length(&m, &[]), int(0));
        assert_eq!(mst_length(&m, &[1]), int(1));
    }

    #[test]
    fn flow_examples() {
        let m = tri_metric();
        let q = DemandVector::new(vec![0, 1, 1]);
        assert_eq!(flow_bound(&m, &q, 1, &[2]), int(2));
        assert_eq!(flow_bound(&m, &q, 2, &[2]), int(1));
        assert_eq!(flow_bound(&m, &q, 1, &[1, 2]), int(3));
    }

    #[test]
    fn tsp_examples() {
        let m = tri_metric();
        assert_eq!(approx_tsp(&m, &[1]).seq(), &[0, 1, 0]);
        assert_eq!(approx_tsp(&m, &[1]).length(), int(2));
        assert_eq!(approx_tsp(&m, &[]).seq(), &[0]);
        let t = approx_tsp(&m, &[1, 2]);
        assert_eq!(t.length(), int(4));
    }

    #[test]
    fn vrp_examples() {
        let m = tri_metric();
        let one = approx_vrp(&m, &DemandVector::new(vec![0, 1, 0]), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].length(), int(2));
        let shared = approx_vrp(&m, &DemandVector::new(vec![0, 1, 1]), 2).unwrap();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].length(), int(4));
        let split = approx_vrp(&m, &DemandVector::new(vec![0, 1, 1]), 1).unwrap();
        assert_eq!(split.len(), 2);
        assert_eq!(split.iter().map(|t| t.length()).sum::<Rational>(), int(6));
        assert!(matches!(
            approx_vrp(&m, &DemandVector::new(vec![0, 3, 0]), 2),
            Err(Error::DemandExceedsCapacity { .. })
        ));
    }

    #[test]
    fn split_respects_capacity() {
        let m = tri_metric();
        let segs = split_order(&m, &[1, 2], &[int(1), int(1)], int(1));
        assert_eq!(segs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn stoch_bound_core_example() {
        let inst = core_instance(2);
        let set = inst.scenarios().unwrap();
        // max(mst, flow) is 1 for {a} and 2 for {b}.
        assert_eq!(stoch_lower_bound(&inst.metric, set.scenarios(), 1), rational::frac(3, 2));
    }
}
