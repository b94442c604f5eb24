//! Exact solvers for tiny instances: Held-Karp TSP, exact VRP, exact
//! recourse, exact StochVRP, exact ratio orienteering, and the structured
//! optimum of the k = 2 hardness family.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kro::KnapRankInstance;
use crate::model::{DemandVector, FixedTour, Metric, RTour, RecourseAction, ServedTour, StochVrpInstance};
use crate::rational::{self, Rational};

/// Optimal closed tours from the depot over every subset of `pts`.
#[derive(Debug, Clone)]
pub struct HeldKarp {
    pts: Vec<usize>,
    /// `dp[mask * k + j]`: shortest depot path covering `mask` ending at `j`.
    dp: Vec<f64>,
    from: Vec<u8>,
    best_end: Vec<u8>,
    cost: Vec<f64>,
}

impl HeldKarp {
    pub fn new(metric: &Metric, pts: &[usize]) -> Self {
        let k = pts.len();
        assert!(k <= 20, "Held-Karp table too large");
        let r = metric.root();
        let full = 1usize << k;
        let mut dp = vec![f64::INFINITY; full * k];
        let mut from = vec![u8::MAX; full * k];
        for j in 0..k {
            dp[(1 << j) * k + j] = metric.df(r, pts[j]);
        }
        for mask in 1..full {
            for j in 0..k {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let cur = dp[mask * k + j];
                if !cur.is_finite() {
                    continue;
                }
                for t in 0..k {
                    if mask & (1 << t) != 0 {
                        continue;
                    }
                    let next = mask | (1 << t);
                    let cand = cur + metric.df(pts[j], pts[t]);
                    if cand < dp[next * k + t] - 1e-12 {
                        dp[next * k + t] = cand;
                        from[next * k + t] = j as u8;
                    }
                }
            }
        }
        let mut cost = vec![0.0; full];
        let mut best_end = vec![u8::MAX; full];
        for mask in 1..full {
            let mut best = f64::INFINITY;
            for j in 0..k {
                if mask & (1 << j) != 0 {
                    let c = dp[mask * k + j] + metric.df(pts[j], r);
                    if c < best - 1e-12 {
                        best = c;
                        best_end[mask] = j as u8;
                    }
                }
            }
            cost[mask] = best;
        }
        Self { pts: pts.to_vec(), dp, from, best_end, cost }
    }

    pub fn points(&self) -> &[usize] {
        &self.pts
    }

    /// Optimal tour length over the subset `mask` (floating point).
    pub fn cost(&self, mask: usize) -> f64 {
        self.cost[mask]
    }

    /// Visiting order of an optimal tour over `mask`.
    pub fn order(&self, mask: usize) -> Vec<usize> {
        let k = self.pts.len();
        if mask == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut m = mask;
        let mut j = self.best_end[mask] as usize;
        loop {
            out.push(self.pts[j]);
            let prev = self.from[m * k + j];
            m &= !(1 << j);
            if m == 0 {
                break;
            }
            j = prev as usize;
        }
        let _ = &self.dp;
        out.reverse();
        out
    }

    pub fn tour(&self, metric: &Metric, mask: usize) -> RTour {
        RTour::through(metric, &self.order(mask))
    }

    pub fn mask_of(&self, set: &[usize]) -> usize {
        set.iter()
            .filter_map(|v| self.pts.iter().position(|p| p == v))
            .fold(0, |m, j| m | (1 << j))
    }
}

/// Optimal r-tour through `pts`.
pub fn held_karp(metric: &Metric, pts: &[usize]) -> RTour {
    let mut p: Vec<usize> = pts.iter().copied().filter(|&v| v != metric.root()).collect();
    p.sort_unstable();
    p.dedup();
    let hk = HeldKarp::new(metric, &p);
    hk.tour(metric, (1 << p.len()) - 1)
}

/// Exact unsplittable VRP: set partition of the demand points into
/// capacity-feasible groups, each routed by Held-Karp.
pub fn exact_vrp(metric: &Metric, demands: &DemandVector, capacity: u32) -> Result<(Vec<RTour>, Rational)> {
    let pts = demands.support();
    if pts.len() > 8 {
        return Err(Error::TooLarge(format!("{} demand points (limit 8)", pts.len())));
    }
    for &v in &pts {
        if demands.get(v) > capacity {
            return Err(Error::DemandExceedsCapacity { point: v, demand: demands.get(v), capacity });
        }
    }
    let hk = HeldKarp::new(metric, &pts);
    let loads: Vec<u32> = pts.iter().map(|&v| demands.get(v)).collect();
    let groups = vrp_partition(&hk, &loads, capacity, (1 << pts.len()) - 1);
    let tours: Vec<RTour> = groups.iter().map(|&g| hk.tour(metric, g)).collect();
    let cost = rational::sum(tours.iter().map(|t| t.length_ref()));
    Ok((tours, cost))
}

/// Optimal grouping of `target` into capacity-feasible subsets.
fn vrp_partition(hk: &HeldKarp, loads: &[u32], capacity: u32, target: usize) -> Vec<usize> {
    let k = loads.len();
    let full = 1usize << k;
    let load_of = |m: usize| -> u64 { (0..k).filter(|&j| m & (1 << j) != 0).map(|j| loads[j] as u64).sum() };
    let mut best = vec![f64::INFINITY; full];
    let mut choice = vec![0usize; full];
    best[0] = 0.0;
    for mask in 1..full {
        if mask & !target != 0 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // Enumerate submasks of `rest`, each joined with the lowest bit.
        let mut sub = rest;
        loop {
            let group = sub | low;
            if load_of(group) <= capacity as u64 {
                let c = hk.cost(group) + best[mask ^ group];
                if c < best[mask] - 1e-12 {
                    best[mask] = c;
                    choice[mask] = group;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut out = Vec::new();
    let mut m = target;
    while m != 0 {
        out.push(choice[m]);
        m ^= choice[m];
    }
    out
}

/// Optimal recourse for one scenario against a fixed tour: which demands
/// ride which r-tour, and an exact VRP on the remainder.
pub fn exact_recourse(
    metric: &Metric,
    fixed: &FixedTour,
    scenario: &DemandVector,
    capacity: u32,
) -> Result<(RecourseAction, Rational)> {
    let pts = scenario.support();
    if pts.len() > 8 {
        return Err(Error::TooLarge(format!("{} demand points (limit 8)", pts.len())));
    }
    let hk = HeldKarp::new(metric, &pts);
    let loads: Vec<u32> = pts.iter().map(|&v| scenario.get(v)).collect();
    let servable = servable_sets(metric, fixed, &pts, &loads, capacity);
    let full = (1usize << pts.len()) - 1;
    let mut best: Option<(f64, usize)> = None;
    for (&mask, _) in servable.iter() {
        let groups = vrp_partition(&hk, &loads, capacity, full ^ mask);
        let c: f64 = groups.iter().map(|&g| hk.cost(g)).sum();
        if best.map_or(true, |(b, _)| c < b - 1e-12) {
            best = Some((c, mask));
        }
    }
    let (_, mask) = best.expect("the empty set is always servable");
    let assignment = &servable[&mask];
    let mut served = vec![Vec::new(); fixed.len()];
    for (j, &a) in assignment.iter().enumerate() {
        for b in 0..pts.len() {
            if a & (1 << b) != 0 {
                served[j].push((pts[b], loads[b]));
            }
        }
    }
    let recourse: Vec<ServedTour> = vrp_partition(&hk, &loads, capacity, full ^ mask)
        .into_iter()
        .map(|g| ServedTour {
            tour: hk.tour(metric, g),
            served: (0..pts.len()).filter(|&b| g & (1 << b) != 0).map(|b| (pts[b], loads[b])).collect(),
        })
        .collect();
    let action = RecourseAction { served, recourse };
    let cost = action.recourse_length();
    Ok((action, cost))
}

/// Every subset of demand points that the fixed tour can absorb, with one
/// witness assignment (a mask per r-tour).
fn servable_sets(
    metric: &Metric,
    fixed: &FixedTour,
    pts: &[usize],
    loads: &[u32],
    capacity: u32,
) -> BTreeMap<usize, Vec<usize>> {
    let k = pts.len();
    let mut reach: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    reach.insert(0, Vec::new());
    for tour in fixed.rtours() {
        let on: usize = (0..k).filter(|&b| tour.visits(pts[b])).fold(0, |m, b| m | (1 << b));
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&mask, witness) in &reach {
            let avail = on & !mask;
            let mut sub = avail;
            loop {
                let load: u64 = (0..k).filter(|&b| sub & (1 << b) != 0).map(|b| loads[b] as u64).sum();
                if load <= capacity as u64 {
                    next.entry(mask | sub).or_insert_with(|| {
                        let mut w = witness.clone();
                        w.push(sub);
                        w
                    });
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & avail;
            }
        }
        reach = next;
    }
    let _ = metric;
    reach
}

/// Size caps for [`exact_stoch_vrp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCaps {
    pub max_points: usize,
    pub max_scenarios: usize,
    pub max_capacity: u32,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { max_points: 5, max_scenarios: 3, max_capacity: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochVrpOptimum {
    pub fixed: FixedTour,
    pub actions: Vec<RecourseAction>,
    pub cost: Rational,
}

/// Exhaustive StochVRP optimum over fixed tours made of at most `n`
/// shortest r-tours (one candidate per vertex subset).
pub fn exact_stoch_vrp(inst: &StochVrpInstance, caps: OracleCaps) -> Result<StochVrpOptimum> {
    let set = inst
        .scenarios()
        .ok_or_else(|| Error::InvalidInstance("the exact oracle needs explicit scenarios".into()))?;
    let metric = &inst.metric;
    if metric.len() > caps.max_points || set.len() > caps.max_scenarios || inst.capacity > caps.max_capacity {
        return Err(Error::TooLarge(format!(
            "n={}, m={}, Q={} exceeds caps n<={}, m<={}, Q<={}",
            metric.len(),
            set.len(),
            inst.capacity,
            caps.max_points,
            caps.max_scenarios,
            caps.max_capacity
        )));
    }
    let customers: Vec<usize> = metric.customers().collect();
    let hk = HeldKarp::new(metric, &customers);
    let mut candidates: Vec<RTour> = (1..(1usize << customers.len())).map(|m| hk.tour(metric, m)).collect();
    candidates.sort_by(|a, b| a.length().cmp(&b.length()).then(a.seq().cmp(b.seq())));
    let m = Rational::from_integer(set.len() as i128);
    let scale = inst.lambda / m;
    let max_tours = metric.len();

    // Per scenario, memoized exact VRP cost of every demand subset.
    struct Scn {
        pts: Vec<usize>,
        loads: Vec<u32>,
        vrp: Vec<Rational>,
    }
    let mut scns = Vec::new();
    for q in set.scenarios() {
        let pts = q.support();
        let loads: Vec<u32> = pts.iter().map(|&v| q.get(v)).collect();
        let shk = HeldKarp::new(metric, &pts);
        let vrp = (0..(1usize << pts.len()))
            .map(|mask| {
                let groups = vrp_partition(&shk, &loads, inst.capacity, mask);
                rational::sum(groups.iter().map(|&g| shk.tour(metric, g).length()).collect::<Vec<_>>().iter())
            })
            .collect();
        scns.push(Scn { pts, loads, vrp });
    }

    let evaluate = |fixed: &FixedTour| -> Rational {
        let mut total = fixed.total_length();
        for s in &scns {
            let full = (1usize << s.pts.len()) - 1;
            let servable = servable_sets(metric, fixed, &s.pts, &s.loads, inst.capacity);
            let best = servable.keys().map(|&mask| s.vrp[full ^ mask]).min().unwrap_or_else(Rational::zero);
            total += scale * best;
        }
        total
    };

    let mut best_cost = evaluate(&FixedTour::empty());
    let mut best_fixed = FixedTour::empty();
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(
        start: usize,
        stack: &mut Vec<usize>,
        fixed_len: Rational,
        candidates: &[RTour],
        max_tours: usize,
        evaluate: &dyn Fn(&FixedTour) -> Rational,
        best_cost: &mut Rational,
        best_fixed: &mut FixedTour,
    ) {
        if stack.len() == max_tours {
            return;
        }
        for c in start..candidates.len() {
            let len = fixed_len + candidates[c].length();
            if len >= *best_cost {
                // Candidates are sorted by length, so later ones cannot help.
                break;
            }
            stack.push(c);
            let fixed = FixedTour::new(stack.iter().map(|&i| candidates[i].clone()).collect());
            let cost = evaluate(&fixed);
            if cost < *best_cost {
                *best_cost = cost;
                *best_fixed = fixed;
            }
            dfs(c, stack, len, candidates, max_tours, evaluate, best_cost, best_fixed);
            stack.pop();
        }
    }
    dfs(0, &mut stack, Rational::zero(), &candidates, max_tours, &evaluate, &mut best_cost, &mut best_fixed);

    let mut actions = Vec::new();
    for q in set.scenarios() {
        let (a, _) = exact_recourse(metric, &best_fixed, q, inst.capacity)?;
        actions.push(a);
    }
    Ok(StochVrpOptimum { fixed: best_fixed, actions, cost: best_cost })
}

/// Exact best `sum_i f_i(W) / d(tour)` over vertex subsets.
pub fn exact_ratio_kro(metric: &Metric, inst: &KnapRankInstance) -> Result<(RTour, f64)> {
    let customers: Vec<usize> = metric.customers().collect();
    if metric.len() > 16 {
        return Err(Error::TooLarge(format!("{} points (limit 16)", metric.len())));
    }
    let hk = HeldKarp::new(metric, &customers);
    let mut best = (RTour::depot(metric), 0.0f64);
    let base = inst.total_rank(&[metric.root()]);
    if base > 0.0 {
        return Ok((RTour::depot(metric), f64::INFINITY));
    }
    for mask in 1..(1usize << customers.len()) {
        let mut set: Vec<usize> = (0..customers.len()).filter(|&b| mask & (1 << b) != 0).map(|b| customers[b]).collect();
        set.push(metric.root());
        let profit = inst.total_rank(&set);
        if profit <= 0.0 {
            continue;
        }
        let len = hk.cost(mask);
        let ratio = if len > 0.0 { profit / len } else { f64::INFINITY };
        if ratio > best.1 + 1e-12 {
            best = (hk.tour(metric, mask), ratio);
        }
    }
    Ok(best)
}

/// Exact optimum of a k = 2 hardness instance with unit demands, `Q = 1`,
/// `d(r,u) = L` and unit distances between vertices.
///
/// Covering every scenario by the fixed tour is optimal (a single recourse
/// visit already costs more than serving everything), so the optimum is
/// `min_t t * 2L - t + (#covered vertices) + |X|`, minimized over `t`
/// tours and vertex sets `X` whose removal leaves a `t`-colorable graph;
/// vertices of `X` ride two tours.
pub fn hardness_optimum_k2(num_vertices: usize, edges: &[(usize, usize)], l: Rational) -> Result<Rational> {
    if num_vertices > 20 {
        return Err(Error::TooLarge(format!("{num_vertices} vertices (limit 20)")));
    }
    let n = num_vertices;
    let mut adj = vec![0u32; n];
    for &(u, v) in edges {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let covered = (0..n).filter(|&v| adj[v] != 0).count();
    if edges.is_empty() {
        return Ok(Rational::zero());
    }
    fn colorable(adj: &[u32], alive: u32, t: usize) -> bool {
        let verts: Vec<usize> = (0..adj.len()).filter(|&v| alive & (1 << v) != 0).collect();
        let mut color = vec![usize::MAX; adj.len()];
        fn go(i: usize, verts: &[usize], adj: &[u32], color: &mut Vec<usize>, t: usize, used: usize) -> bool {
            if i == verts.len() {
                return true;
            }
            let v = verts[i];
            for c in 0..t.min(used + 1) {
                let clash = verts[..i].iter().any(|&u| color[u] == c && adj[v] & (1 << u) != 0);
                if !clash {
                    color[v] = c;
                    if go(i + 1, verts, adj, color, t, used.max(c + 1)) {
                        return true;
                    }
                }
            }
            color[v] = usize::MAX;
            false
        }
        go(0, &verts, adj, &mut color, t, 0)
    }
    let active: u32 = (0..n).filter(|&v| adj[v] != 0).fold(0, |m, v| m | (1 << v));
    let tour_fixed = Rational::from_integer(2) * l - Rational::from_integer(1);
    let mut best: Option<Rational> = None;
    for t in 2..=n.max(2) {
        let base = tour_fixed * Rational::from_integer(t as i128) + Rational::from_integer(covered as i128);
        if best.map_or(false, |b| base >= b) {
            break;
        }
        // Smallest removal set leaving a t-colorable graph.
        let mut found = None;
        'outer: for size in 0..=covered {
            let mut subsets = Vec::new();
            fn choose(start: usize, left: usize, cur: u32, act: &[usize], out: &mut Vec<u32>) {
                if left == 0 {
                    out.push(cur);
                    return;
                }
                for i in start..act.len() {
                    choose(i + 1, left - 1, cur | (1 << act[i]), act, out);
                }
            }
            let act: Vec<usize> = (0..n).filter(|&v| active & (1 << v) != 0).collect();
            choose(0, size, 0, &act, &mut subsets);
            for x in subsets {
                if colorable(&adj, active & !x, t) {
                    found = Some(size);
                    break 'outer;
                }
            }
        }
        let x = found.unwrap_or(covered);
        let cost = base + Rational::from_integer(x as i128);
        if best.map_or(true, |b| cost < b) {
            best = Some(cost);
        }
    }
    Ok(best.unwrap())
}

/// Stable hash of an instance, used as the golden-file key.
pub fn instance_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Pinned optimal values keyed by instance hash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Goldens {
    pub values: BTreeMap<String, String>,
}

impl Goldens {
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| Error::SchemaViolation {
                location: path.display().to_string(),
                message: e.to_string(),
            }),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn get(&self, key: &str) -> Option<Rational> {
        self.values.get(key).and_then(|s| rational::parse(s).ok())
    }

    pub fn insert(&mut self, key: String, value: &Rational) {
        self.values.insert(key, rational::format(value));
    }
}

/// Set when golden files may be rewritten instead of compared.
pub fn regenerate_goldens() -> bool {
    std::env::var("SVRP_REGENERATE_GOLDENS").map_or(false, |v| v == "1")
}

/// Cache of exact VRP costs keyed by demand vector.
#[derive(Debug, Default)]
pub struct VrpMemo {
    map: HashMap<Vec<u32>, Rational>,
}

impl VrpMemo {
    pub fn cost(&mut self, metric: &Metric, demands: &DemandVector, capacity: u32) -> Result<Rational> {
        if let Some(c) = self.map.get(demands.as_slice()) {
            return Ok(*c);
        }
        let (_, c) = exact_vrp(metric, demands, capacity)?;
        self.map.insert(demands.as_slice().to_vec(), c);
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detvrp;
    use crate::model::tests::{core_instance, tri_metric};
    use crate::model::{evaluate_objective, Demands, ScenarioSet};
    use crate::rational::{frac, int};

    #[test]
    fn vrp_examples() {
        let m = tri_metric();
        assert_eq!(exact_vrp(&m, &DemandVector::new(vec![0, 1, 0]), 1).unwrap().1, int(2));
        assert_eq!(exact_vrp(&m, &DemandVector::new(vec![0, 1, 1]), 2).unwrap().1, int(4));
        assert_eq!(exact_vrp(&m, &DemandVector::new(vec![0, 1, 1]), 1).unwrap().1, int(6));
    }

    #[test]
    fn vrp_respects_lower_bounds() {
        let m = tri_metric();
        for q in [[0, 1, 1], [0, 2, 1], [0, 0, 2], [0, 1, 0]] {
            let d = DemandVector::new(q.to_vec());
            for cap in 2..=3 {
                let (_, c) = exact_vrp(&m, &d, cap).unwrap();
                let lb = detvrp::lower_bounds(&m, &d, cap);
                assert!(c >= lb.best());
            }
        }
    }

    #[test]
    fn core_example_optimum() {
        let inst = core_instance(2);
        let opt = exact_stoch_vrp(&inst, OracleCaps::default()).unwrap();
        assert_eq!(opt.cost, int(4));
        assert_eq!(evaluate_objective(&inst, &opt.fixed, &opt.actions).unwrap(), int(4));
    }

    #[test]
    fn zero_demands_cost_nothing() {
        let m = tri_metric();
        let inst = StochVrpInstance::new(
            m,
            1,
            int(2),
            Demands::Scenarios(ScenarioSet::new(vec![DemandVector::zeros(3)]).unwrap()),
        )
        .unwrap();
        let opt = exact_stoch_vrp(&inst, OracleCaps::default()).unwrap();
        assert_eq!(opt.cost, int(0));
        assert!(opt.fixed.is_empty());
    }

    #[test]
    fn lambda_one_single_scenario_is_plain_vrp() {
        let m = tri_metric();
        let q = DemandVector::new(vec![0, 1, 1]);
        for cap in 1..=2 {
            let inst = StochVrpInstance::new(
                m.clone(),
                cap,
                int(1),
                Demands::Scenarios(ScenarioSet::new(vec![q.clone()]).unwrap()),
            )
            .unwrap();
            let opt = exact_stoch_vrp(&inst, OracleCaps::default()).unwrap();
            assert_eq!(opt.cost, exact_vrp(&m, &q, cap).unwrap().1);
        }
    }

    #[test]
    fn ratio_examples() {
        let m = tri_metric();
        let one = KnapRankInstance::new(vec![vec![0.0, 3.0, 0.0]], vec![vec![0.0; 3]]).unwrap();
        let (tour, ratio) = exact_ratio_kro(&m, &one).unwrap();
        assert_eq!(tour.seq(), &[0, 1, 0]);
        assert!((ratio - 1.5).abs() < 1e-12);
        let zero = KnapRankInstance::new(vec![vec![0.0; 3]], vec![vec![0.0; 3]]).unwrap();
        assert_eq!(exact_ratio_kro(&m, &zero).unwrap().1, 0.0);
    }

    #[test]
    fn recourse_uses_fixed_capacity() {
        let m = tri_metric();
        let fixed = FixedTour::new(vec![RTour::new(&m, vec![0, 1, 2, 0]).unwrap()]);
        let q = DemandVector::new(vec![0, 1, 1]);
        let (a, c) = exact_recourse(&m, &fixed, &q, 1).unwrap();
        assert_eq!(c, int(2));
        a.validate(&m, &fixed, 1, 0, &q).unwrap();
        let (_, c) = exact_recourse(&m, &fixed, &q, 2).unwrap();
        assert_eq!(c, int(0));
    }

    #[test]
    fn hardness_structured_values() {
        // Path 0-1-2-3 is bipartite: two tours, every vertex covered once.
        let l = frac(3, 2);
        let v = hardness_optimum_k2(4, &[(0, 1), (2, 3)], l).unwrap();
        assert_eq!(v, int(2) * (int(2) * l - int(1)) + int(4));
        // A triangle needs one doubled vertex.
        let v = hardness_optimum_k2(3, &[(0, 1), (1, 2), (0, 2)], l).unwrap();
        assert_eq!(v, int(2) * (int(2) * l - int(1)) + int(3) + int(1));
    }

    #[test]
    fn held_karp_matches_permutations() {
        let m = tri_metric();
        assert_eq!(held_karp(&m, &[1, 2]).length(), int(4));
        assert_eq!(held_karp(&m, &[]).seq(), &[0]);
    }
}
