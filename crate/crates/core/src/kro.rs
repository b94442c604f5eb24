//! Ratio knapsack rank-function orienteering on tree embeddings.
//!
//! Pipeline per (embedding, budget): solve LP(B), then walk the tree edge
//! by edge keeping whichever of exclude/include has the better
//! profit-to-length estimate. The randomized rounding is exposed too, for
//! validation.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hst::{self, TreeMetric};
use crate::lp::{LpModel, Sense};
use crate::model::{Metric, RTour};
use crate::rational;
use crate::seed;

const TOL: f64 = 1e-12;

/// Profits `w[i][v] >= 0` and sizes `c[i][v]` in `[0, 1]` per knapsack `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapRankInstance {
    profits: Vec<Vec<f64>>,
    sizes: Vec<Vec<f64>>,
}

impl KnapRankInstance {
    pub fn new(profits: Vec<Vec<f64>>, sizes: Vec<Vec<f64>>) -> Result<Self> {
        if profits.len() != sizes.len() {
            return Err(Error::InvalidInstance("profit and size tables differ in knapsack count".into()));
        }
        let n = profits.first().map_or(0, |p| p.len());
        for (w, c) in profits.iter().zip(&sizes) {
            if w.len() != n || c.len() != n {
                return Err(Error::InvalidInstance("knapsack vectors must cover every point".into()));
            }
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidInstance("profits must be finite and non-negative".into()));
            }
            if c.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidInstance("sizes must lie in [0, 1]".into()));
            }
        }
        Ok(Self { profits, sizes })
    }

    pub fn num_knapsacks(&self) -> usize {
        self.profits.len()
    }

    pub fn num_points(&self) -> usize {
        self.profits.first().map_or(0, |p| p.len())
    }

    pub fn profit(&self, i: usize, v: usize) -> f64 {
        self.profits[i][v]
    }

    pub fn size(&self, i: usize, v: usize) -> f64 {
        self.sizes[i][v]
    }

    pub fn has_profit(&self) -> bool {
        self.profits.iter().flatten().any(|&w| w > 0.0)
    }

    /// Points with positive profit in some knapsack, ascending.
    pub fn profitable_points(&self) -> Vec<usize> {
        (0..self.num_points())
            .filter(|&v| (0..self.num_knapsacks()).any(|i| self.profits[i][v] > 0.0))
            .collect()
    }

    /// `sum_i f_i(set)`.
    pub fn total_rank(&self, set: &[usize]) -> f64 {
        (0..self.num_knapsacks()).map(|i| rank_value(self, i, set)).sum()
    }
}

/// Exact `f_i(set)`: best profit of a subset with total size at most 1.
pub fn rank_value(inst: &KnapRankInstance, i: usize, set: &[usize]) -> f64 {
    let mut items: Vec<(f64, f64)> = set
        .iter()
        .map(|&v| (inst.profit(i, v), inst.size(i, v)))
        .filter(|&(w, _)| w > 0.0)
        .collect();
    let free: f64 = items.iter().filter(|&&(_, c)| c <= 0.0).map(|&(w, _)| w).sum();
    items.retain(|&(_, c)| c > 0.0);
    items.sort_by(|a, b| (b.0 / b.1).total_cmp(&(a.0 / a.1)));
    fn bound(items: &[(f64, f64)], k: usize, mut cap: f64) -> f64 {
        let mut b = 0.0;
        for &(w, c) in &items[k..] {
            if c <= cap {
                b += w;
                cap -= c;
            } else {
                return b + w * cap / c;
            }
        }
        b
    }
    fn dfs(items: &[(f64, f64)], k: usize, cap: f64, value: f64, best: &mut f64) {
        if value > *best {
            *best = value;
        }
        if k == items.len() || value + bound(items, k, cap) <= *best + TOL {
            return;
        }
        let (w, c) = items[k];
        if c <= cap + TOL {
            dfs(items, k + 1, cap - c, value + w, best);
        }
        dfs(items, k + 1, cap, value, best);
    }
    let mut best = 0.0;
    dfs(&items, 0, 1.0, 0.0, &mut best);
    free + best
}

/// LP relaxation `g_i(set)` of the knapsack: fill by decreasing profit
/// density (ties by smaller size, then point id), last item fractional.
pub fn fractional_rank(inst: &KnapRankInstance, i: usize, set: &[usize]) -> f64 {
    let mut items: Vec<(usize, f64, f64)> = set
        .iter()
        .map(|&v| (v, inst.profit(i, v), inst.size(i, v)))
        .filter(|&(_, w, _)| w > 0.0)
        .collect();
    items.sort_by(|a, b| {
        let da = if a.2 > 0.0 { a.1 / a.2 } else { f64::INFINITY };
        let db = if b.2 > 0.0 { b.1 / b.2 } else { f64::INFINITY };
        db.total_cmp(&da).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0))
    });
    let mut cap = 1.0;
    let mut value = 0.0;
    for (_, w, c) in items {
        if c <= cap {
            value += w;
            cap -= c;
        } else {
            value += w * cap / c;
            break;
        }
    }
    value
}

/// First-fit decreasing into parts of total size at most 1. Returns the
/// parts as lists of indices into `sizes`.
pub fn greedy_partition(sizes: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].total_cmp(&sizes[a]).then(a.cmp(&b)));
    let mut parts: Vec<(f64, Vec<usize>)> = Vec::new();
    for k in order {
        match parts.iter_mut().find(|(load, _)| *load + sizes[k] <= 1.0 + TOL) {
            Some((load, items)) => {
                *load += sizes[k];
                items.push(k);
            }
            None => parts.push((sizes[k], vec![k])),
        }
    }
    parts.into_iter().map(|(_, items)| items).collect()
}

/// `ell` used by every threshold: the realized tree depth, at least 1.
pub fn tree_ell(tree: &TreeMetric) -> usize {
    tree.height().max(1)
}

/// Feasible point of LP(B). `x` is indexed by tree node (edge id), with
/// `x[0] = 1` standing for the dummy root edge; `z[i][v]` per point.
#[derive(Debug, Clone, PartialEq)]
pub struct KroLpSolution {
    pub x: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub budget: f64,
    pub value: f64,
}

impl KroLpSolution {
    /// Clamps to `[0, 1]`, enforces monotonicity down the tree and
    /// `z <= x_parent`, and recomputes the value.
    pub fn sanitize(&mut self, tree: &TreeMetric, inst: &KnapRankInstance) {
        self.x[0] = 1.0;
        for e in tree.subtree(0).into_iter().skip(1) {
            let p = tree.parent(e).unwrap();
            let mut v = self.x[e].clamp(0.0, 1.0).min(self.x[p]);
            if v < TOL {
                v = 0.0;
            }
            self.x[e] = v;
        }
        for (i, zi) in self.z.iter_mut().enumerate() {
            for (v, z) in zi.iter_mut().enumerate() {
                let mut val = z.clamp(0.0, 1.0).min(self.x[tree.node_of(v)]);
                if val < TOL || inst.profit(i, v) <= 0.0 {
                    val = 0.0;
                }
                *z = val;
            }
        }
        self.value = self.objective(inst);
    }

    pub fn objective(&self, inst: &KnapRankInstance) -> f64 {
        let mut s = 0.0;
        for (i, zi) in self.z.iter().enumerate() {
            for (v, z) in zi.iter().enumerate() {
                s += inst.profit(i, v) * z;
            }
        }
        s
    }

    /// Largest violation of kro1..kro5 and the box constraints.
    pub fn max_violation(&self, tree: &TreeMetric, inst: &KnapRankInstance) -> f64 {
        let mut worst: f64 = 0.0;
        let mut below = vec![vec![0.0; tree.num_nodes()]; inst.num_knapsacks()];
        for e in tree.edges() {
            let p = tree.parent(e).unwrap();
            worst = worst.max(self.x[e] - self.x[p]).max(-self.x[e]).max(self.x[e] - 1.0);
        }
        for i in 0..inst.num_knapsacks() {
            let mut total = 0.0;
            for v in 0..inst.num_points() {
                let z = self.z[i][v];
                worst = worst.max(z - self.x[tree.node_of(v)]).max(-z);
                total += inst.size(i, v) * z;
                for e in tree.path_to_root(tree.node_of(v)) {
                    below[i][e] += inst.size(i, v) * z;
                }
            }
            worst = worst.max(total - 1.0);
            for e in tree.edges() {
                worst = worst.max(below[i][e] - self.x[e]);
            }
        }
        let length: f64 = tree.edges().map(|e| tree.edge_len(e) * self.x[e]).sum();
        worst.max(length - self.budget / 2.0)
    }
}

/// LP(B) with variable maps.
#[derive(Debug, Clone)]
pub struct KroLp {
    pub model: LpModel,
    pub x_var: Vec<Option<usize>>,
    pub z_var: Vec<Vec<Option<usize>>>,
    pub budget: f64,
}

pub fn build_kro_lp(tree: &TreeMetric, inst: &KnapRankInstance, budget: f64) -> KroLp {
    let mut model = LpModel::maximize();
    let nn = tree.num_nodes();
    let mut x_var = vec![None; nn];
    for e in tree.edges() {
        x_var[e] = Some(model.add_var(format!("x{e}"), 0.0, Some(1.0), 0.0));
    }
    let k = inst.num_knapsacks();
    let mut z_var = vec![vec![None; inst.num_points()]; k];
    for i in 0..k {
        for v in 0..inst.num_points() {
            let w = inst.profit(i, v);
            if w > 0.0 {
                z_var[i][v] = Some(model.add_var(format!("z{i}_{v}"), 0.0, Some(1.0), w));
            }
        }
    }
    // kro1: x_e <= x_parent(e).
    for e in tree.edges() {
        if let Some(p) = tree.parent_edge(e) {
            model.constrain(vec![(x_var[e].unwrap(), 1.0), (x_var[p].unwrap(), -1.0)], Sense::Le, 0.0);
        }
    }
    for i in 0..k {
        // kro2: z_v <= x_pi(v).
        for v in 0..inst.num_points() {
            if let Some(zv) = z_var[i][v] {
                let node = tree.node_of(v);
                if node != 0 {
                    model.constrain(vec![(zv, 1.0), (x_var[node].unwrap(), -1.0)], Sense::Le, 0.0);
                }
            }
        }
        // kro3: sum c z <= 1.
        let row: Vec<(usize, f64)> = (0..inst.num_points())
            .filter_map(|v| z_var[i][v].map(|z| (z, inst.size(i, v))))
            .filter(|&(_, c)| c > 0.0)
            .collect();
        if !row.is_empty() {
            model.constrain(row, Sense::Le, 1.0);
        }
        // kro4: subtree size at most x_e.
        for e in tree.edges() {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for node in tree.subtree(e) {
                for &v in tree.points_at(node) {
                    if let Some(z) = z_var[i][v] {
                        if inst.size(i, v) > 0.0 {
                            row.push((z, inst.size(i, v)));
                        }
                    }
                }
            }
            if !row.is_empty() {
                row.push((x_var[e].unwrap(), -1.0));
                model.constrain(row, Sense::Le, 0.0);
            }
        }
    }
    // kro5: tree length at most B/2.
    let row: Vec<(usize, f64)> = tree.edges().map(|e| (x_var[e].unwrap(), tree.edge_len(e))).collect();
    if !row.is_empty() {
        model.constrain(row, Sense::Le, budget / 2.0);
    }
    KroLp { model, x_var, z_var, budget }
}

pub fn solve_kro_lp(tree: &TreeMetric, inst: &KnapRankInstance, budget: f64) -> Result<KroLpSolution> {
    let lp = build_kro_lp(tree, inst, budget);
    let sol = lp.model.solve()?;
    let mut x = vec![1.0; tree.num_nodes()];
    for e in tree.edges() {
        x[e] = sol.values[lp.x_var[e].unwrap()];
    }
    let z = lp
        .z_var
        .iter()
        .map(|row| row.iter().map(|v| v.map_or(0.0, |j| sol.values[j])).collect())
        .collect();
    let mut out = KroLpSolution { x, z, budget, value: 0.0 };
    out.sanitize(tree, inst);
    Ok(out)
}

/// One draw of the randomized rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct GkrOutcome {
    /// `in_f[e]` for every node; the root is always in.
    pub in_f: Vec<bool>,
    pub selected: Vec<Vec<usize>>,
    pub altered: Vec<Vec<usize>>,
}

impl GkrOutcome {
    pub fn edges(&self) -> Vec<usize> {
        (1..self.in_f.len()).filter(|&e| self.in_f[e]).collect()
    }
}

fn keep_probability(num: f64, den: f64) -> Result<f64> {
    if num <= 0.0 {
        return Ok(0.0);
    }
    if den <= 0.0 {
        return Err(Error::ProbabilityOutOfRange(f64::INFINITY));
    }
    let p = num / den;
    if p > 1.0 + 1e-9 {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(p.min(1.0))
}

/// Keeps each edge with probability `x_e / x_parent`, retains the root
/// component, then samples each knapsack's leaves and applies the `4 ell`
/// alteration.
pub fn gkr_round<R: Rng>(tree: &TreeMetric, inst: &KnapRankInstance, sol: &KroLpSolution, rng: &mut R) -> Result<GkrOutcome> {
    let nn = tree.num_nodes();
    let mut in_f = vec![false; nn];
    in_f[0] = true;
    for e in tree.subtree(0).into_iter().skip(1) {
        let p = tree.parent(e).unwrap();
        let prob = keep_probability(sol.x[e], sol.x[p])?;
        let kept = rng.gen::<f64>() < prob;
        in_f[e] = kept && in_f[p];
    }
    let ell = tree_ell(tree) as f64;
    let mut selected = Vec::with_capacity(inst.num_knapsacks());
    let mut altered = Vec::with_capacity(inst.num_knapsacks());
    for i in 0..inst.num_knapsacks() {
        let mut s = Vec::new();
        for v in 0..inst.num_points() {
            let node = tree.node_of(v);
            let prob = keep_probability(sol.z[i][v], sol.x[node])?;
            let hit = rng.gen::<f64>() < prob;
            if hit && in_f[node] {
                s.push(v);
            }
        }
        let size: f64 = s.iter().map(|&v| inst.size(i, v)).sum();
        altered.push(if size > 4.0 * ell { Vec::new() } else { s.clone() });
        selected.push(s);
    }
    Ok(GkrOutcome { in_f, selected, altered })
}

/// Tree extended with one zero-length leaf per (knapsack, profitable point).
#[derive(Debug, Clone)]
pub struct ExtendedTree {
    /// Parent of every extended node; tree nodes keep their ids.
    pub parent: Vec<Option<usize>>,
    pub len: Vec<f64>,
    pub children: Vec<Vec<usize>>,
    /// `leaves[i]` lists `(point, node)` for knapsack `i`.
    pub leaves: Vec<Vec<(usize, usize)>>,
    /// `theta[i][a][b]`: node whose parent edge is the LCA edge of leaves
    /// `a` and `b` of knapsack `i`; 0 is the dummy root edge.
    theta: Vec<Vec<Vec<usize>>>,
    ell: f64,
}

impl ExtendedTree {
    pub fn new(tree: &TreeMetric, inst: &KnapRankInstance) -> Self {
        let mut parent: Vec<Option<usize>> = (0..tree.num_nodes()).map(|v| tree.parent(v)).collect();
        let mut len: Vec<f64> = (0..tree.num_nodes()).map(|v| if v == 0 { 0.0 } else { tree.edge_len(v) }).collect();
        let mut leaves = Vec::new();
        for i in 0..inst.num_knapsacks() {
            let mut li = Vec::new();
            for v in 0..inst.num_points() {
                if inst.profit(i, v) > 0.0 {
                    parent.push(Some(tree.node_of(v)));
                    len.push(0.0);
                    li.push((v, parent.len() - 1));
                }
            }
            leaves.push(li);
        }
        let mut children = vec![Vec::new(); parent.len()];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        let theta = leaves
            .iter()
            .map(|li| {
                li.iter()
                    .map(|&(u, lu)| {
                        li.iter()
                            .map(|&(v, _)| if u == v { lu } else { tree.lca(tree.node_of(u), tree.node_of(v)) })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { parent, len, children, leaves, theta, ell: tree_ell(tree) as f64 }
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Nodes strictly below `v`.
    pub fn descendants(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.children[v].clone();
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().copied());
        }
        out
    }

    /// Initial values `y*`: `x` on tree edges, `z` on knapsack leaves.
    pub fn initial_y(&self, sol: &KroLpSolution) -> Vec<f64> {
        let mut y = vec![0.0; self.num_nodes()];
        y[..sol.x.len()].copy_from_slice(&sol.x);
        y[0] = 1.0;
        for (i, li) in self.leaves.iter().enumerate() {
            for &(v, node) in li {
                y[node] = sol.z[i][v];
            }
        }
        y
    }
}

/// Pessimistic estimators `(P, D)` for edge values `y` (with `y[0] = 1`).
pub fn estimators(ext: &ExtendedTree, inst: &KnapRankInstance, y: &[f64]) -> Result<(f64, f64)> {
    let mut p = 0.0;
    let quarter = 1.0 / (4.0 * ext.ell);
    for (i, li) in ext.leaves.iter().enumerate() {
        for (b, &(v, lv)) in li.iter().enumerate() {
            let yv = y[lv];
            if yv <= 0.0 {
                continue;
            }
            let mut pen = 0.0;
            for (a, &(u, lu)) in li.iter().enumerate() {
                let yu = y[lu];
                let c = inst.size(i, u);
                if yu <= 0.0 || c <= 0.0 {
                    continue;
                }
                let th = ext.theta[i][a][b];
                let yt = if th == 0 { 1.0 } else { y[th] };
                if yt <= 0.0 {
                    return Err(Error::DivisionByZero(th));
                }
                pen += c * yu * yv / yt;
            }
            p += inst.profit(i, v) * (yv - quarter * pen);
        }
    }
    let d = (1..ext.num_nodes()).map(|f| ext.len[f] * y[f]).sum();
    Ok((p, d))
}

/// Profit-to-length ratio with zero lengths ordered by the sign of `p`.
pub fn ratio_of(p: f64, d: f64) -> f64 {
    if d > 0.0 {
        p / d
    } else if p > 0.0 {
        f64::INFINITY
    } else if p < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandStep {
    pub edge: usize,
    pub y_e: f64,
    pub p: f64,
    pub d: f64,
    pub p0: f64,
    pub d0: f64,
    pub p1: f64,
    pub d1: f64,
    pub include: bool,
}

impl DerandStep {
    /// `|P - (y P1 + (1-y) P0)|` and the same for `D`.
    pub fn identity_gap(&self) -> (f64, f64) {
        (
            (self.p - (self.y_e * self.p1 + (1.0 - self.y_e) * self.p0)).abs(),
            (self.d - (self.y_e * self.d1 + (1.0 - self.y_e) * self.d0)).abs(),
        )
    }

    pub fn ratio_before(&self) -> f64 {
        ratio_of(self.p, self.d)
    }

    pub fn ratio_after(&self) -> f64 {
        if self.include {
            ratio_of(self.p1, self.d1)
        } else {
            ratio_of(self.p0, self.d0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandOutcome {
    /// Tree edges of the chosen subtree, ascending.
    pub edges: Vec<usize>,
    pub selected: Vec<Vec<usize>>,
    pub altered: Vec<Vec<usize>>,
    pub initial: (f64, f64),
    pub last: (f64, f64),
    /// `sum_i f_i` over every point whose node lies in the subtree.
    pub profit: f64,
    pub tree_length: f64,
    pub ratio: f64,
    pub trajectory: Vec<DerandStep>,
    /// Set when LP(B) is zero and nothing was attempted.
    pub empty_lp: bool,
}

/// Deterministic edge-by-edge walk driven by the estimators.
pub fn derandomize(tree: &TreeMetric, inst: &KnapRankInstance, sol: &KroLpSolution) -> Result<DerandOutcome> {
    let ext = ExtendedTree::new(tree, inst);
    let nn = ext.num_nodes();
    if sol.value <= TOL {
        return Ok(DerandOutcome {
            edges: Vec::new(),
            selected: vec![Vec::new(); inst.num_knapsacks()],
            altered: vec![Vec::new(); inst.num_knapsacks()],
            initial: (0.0, 0.0),
            last: (0.0, 0.0),
            profit: 0.0,
            tree_length: 0.0,
            ratio: 0.0,
            trajectory: Vec::new(),
            empty_lp: true,
        });
    }
    let mut y = ext.initial_y(sol);
    let mut frozen = vec![false; nn];
    frozen[0] = true;
    let mut decided = vec![false; nn];
    decided[0] = true;
    let initial = estimators(&ext, inst, &y)?;
    let mut trajectory = Vec::new();
    loop {
        let next = (1..nn).find(|&e| !decided[e] && frozen[ext.parent[e].unwrap()]);
        let Some(e) = next else { break };
        let (p, d) = estimators(&ext, inst, &y)?;
        let below = ext.descendants(e);
        let y_e = y[e];

        let mut y0 = y.clone();
        y0[e] = 0.0;
        for &u in &below {
            y0[u] = 0.0;
        }
        let (p0, d0) = estimators(&ext, inst, &y0)?;

        let (y1, p1, d1) = if y_e > 0.0 {
            let mut y1 = y.clone();
            y1[e] = 1.0;
            for &u in &below {
                y1[u] = (y[u] / y_e).min(1.0);
            }
            let (p1, d1) = estimators(&ext, inst, &y1)?;
            (Some(y1), p1, d1)
        } else {
            (None, p0, d0)
        };
        let include = y1.is_some() && ratio_of(p1, d1) > ratio_of(p0, d0);
        trajectory.push(DerandStep { edge: e, y_e, p, d, p0, d0, p1, d1, include });
        decided[e] = true;
        if include {
            y = y1.unwrap();
            frozen[e] = true;
        } else {
            y = y0;
            for u in below {
                decided[u] = true;
            }
        }
    }
    let last = estimators(&ext, inst, &y)?;
    let edges: Vec<usize> = tree.edges().filter(|&e| frozen[e]).collect();
    let mut selected = Vec::new();
    let mut altered = Vec::new();
    for (i, li) in ext.leaves.iter().enumerate() {
        let s: Vec<usize> = li.iter().filter(|&&(_, node)| frozen[node]).map(|&(v, _)| v).collect();
        let size: f64 = s.iter().map(|&v| inst.size(i, v)).sum();
        altered.push(if size > 4.0 * ext.ell { Vec::new() } else { s.clone() });
        selected.push(s);
    }
    let covered: Vec<usize> = (0..inst.num_points()).filter(|&v| frozen[tree.node_of(v)]).collect();
    let profit = inst.total_rank(&covered);
    let tree_length = tree.edges_length(&edges);
    Ok(DerandOutcome {
        edges,
        selected,
        altered,
        initial,
        last,
        profit,
        tree_length,
        ratio: ratio_of(profit, tree_length),
        trajectory,
        empty_lp: false,
    })
}

/// CSV dump of a derandomization trajectory.
pub fn trajectory_csv(steps: &[DerandStep]) -> String {
    let mut s = String::from("step,edge,y_e,P,D,P0,D0,P1,D1,include\n");
    for (k, t) in steps.iter().enumerate() {
        let _ = writeln!(
            s,
            "{k},{},{},{},{},{},{},{},{},{}",
            t.edge, t.y_e, t.p, t.d, t.p0, t.d0, t.p1, t.d1, t.include
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct KroConfig {
    pub embeddings: usize,
    /// Upper limit on budget guesses per embedding (all when `None`).
    pub max_budgets: Option<usize>,
    pub seed: u64,
}

impl Default for KroConfig {
    fn default() -> Self {
        Self { embeddings: 8, max_budgets: None, seed: 0 }
    }
}

/// Best candidate found by [`ratio_kro`].
#[derive(Debug, Clone, PartialEq)]
pub struct KroResult {
    pub tour: RTour,
    pub profit: f64,
    pub ratio: f64,
    pub lp_value: f64,
    pub budget: f64,
    pub ell: usize,
    pub tree_ratio: f64,
    pub embedding: usize,
    /// `LP(B) / (32 ell B)` for the winning candidate.
    pub floor: f64,
}

/// Powers of two from `2 * lo` up to `hi`, inclusive of the bracketing
/// powers.
pub fn budget_grid(lo: f64, hi: f64, limit: Option<usize>) -> Vec<f64> {
    if !(lo > 0.0) || !(hi > 0.0) {
        return Vec::new();
    }
    let a = lo.log2().floor() as i32;
    let b = hi.max(lo).log2().ceil() as i32;
    let all: Vec<f64> = (a..=b).map(|k| 2f64.powi(k)).collect();
    match limit {
        Some(l) if l > 0 && l < all.len() => {
            if l == 1 {
                return vec![all[all.len() - 1]];
            }
            (0..l).map(|j| all[j * (all.len() - 1) / (l - 1)]).collect()
        }
        _ => all,
    }
}

/// Embeds, sweeps the budget, derandomizes and lifts; returns the best
/// profit-to-length tour in the original metric.
pub fn ratio_kro(metric: &Metric, inst: &KnapRankInstance, cfg: &KroConfig) -> Result<KroResult> {
    if !inst.has_profit() {
        return Err(Error::NoProfit);
    }
    let r = metric.root();
    let profitable = inst.profitable_points();
    let mut best: Option<KroResult> = None;
    for emb in 0..cfg.embeddings.max(1) {
        let tree = hst::embed(metric, seed::derive(cfg.seed, emb as u64));
        let ell = tree_ell(&tree);
        let dists: Vec<f64> = profitable.iter().map(|&v| tree.tree_dist(r, v)).filter(|&d| d > 0.0).collect();
        let candidates: Vec<(f64, DerandOutcome, f64)> = if dists.is_empty() {
            // Every profitable point sits on the depot's node.
            let profit = inst.total_rank(tree.points_at(0));
            let out = DerandOutcome {
                edges: Vec::new(),
                selected: Vec::new(),
                altered: Vec::new(),
                initial: (profit, 0.0),
                last: (profit, 0.0),
                profit,
                tree_length: 0.0,
                ratio: ratio_of(profit, 0.0),
                trajectory: Vec::new(),
                empty_lp: false,
            };
            vec![(0.0, out, profit)]
        } else {
            let lo = 2.0 * dists.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = 2.0 * metric.len() as f64 * dists.iter().copied().fold(0.0, f64::max);
            let mut out = Vec::new();
            for budget in budget_grid(lo, hi, cfg.max_budgets) {
                let sol = solve_kro_lp(&tree, inst, budget)?;
                if sol.value <= TOL {
                    continue;
                }
                let d = derandomize(&tree, inst, &sol)?;
                out.push((budget, d, sol.value));
            }
            out
        };
        for (budget, d, lp_value) in candidates {
            let tour = tree.lift_tour(metric, &d.edges)?;
            let mut visited = tour.points(metric);
            visited.push(r);
            let profit = inst.total_rank(&visited);
            let ratio = ratio_of(profit, rational::to_f64(&tour.length()));
            let floor = if budget > 0.0 { lp_value / (32.0 * ell as f64 * budget) } else { 0.0 };
            let cand = KroResult {
                tour,
                profit,
                ratio,
                lp_value,
                budget,
                ell,
                tree_ratio: d.ratio,
                embedding: emb,
                floor,
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let tol = 1e-12 * b.ratio.abs().max(1.0);
                    cand.ratio > b.ratio + tol || (cand.ratio >= b.ratio - tol && cand.profit > b.profit + 1e-12)
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best.ok_or(Error::NoProfit)
}
