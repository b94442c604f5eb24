//! Independent per-point demands: a two-class structure (points served by
//! the fixed tour with high probability, points left to recourse), chosen
//! by an LP with a sampled spanning-tree term and a 1/2 threshold.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;

use crate::detvrp;
use crate::error::{Error, Result};
use crate::lp::{separate_cuts, Constraint, EdgeIndex, LpModel, Sense};
use crate::model::{DemandVector, FixedTour, Metric, RTour, RecourseAction, ServedTour};
use crate::rational::{self, Rational};
use crate::reduction::{mean_and_error, DemandSampler};
use crate::seed;

/// Finite support `(demand, probability)` per point, independent across
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct IndepDistribution {
    supports: Vec<Vec<(u32, Rational)>>,
}

impl IndepDistribution {
    pub fn new(supports: Vec<Vec<(u32, Rational)>>) -> Result<Self> {
        for (v, s) in supports.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidDemand(format!("point {v}: empty support")));
            }
            if s.iter().any(|(_, p)| *p < Rational::zero()) {
                return Err(Error::InvalidDemand(format!("point {v}: negative probability")));
            }
            if rational::sum(s.iter().map(|(_, p)| p)) != Rational::one() {
                return Err(Error::InvalidDemand(format!("point {v}: probabilities do not sum to 1")));
            }
        }
        Ok(Self { supports })
    }

    /// Deterministic demands.
    pub fn point_mass(q: &DemandVector) -> Self {
        Self { supports: q.as_slice().iter().map(|&x| vec![(x, Rational::one())]).collect() }
    }

    /// Demand `value` with probability `p` at every listed point, zero
    /// elsewhere.
    pub fn bernoulli(n: usize, points: &[usize], value: u32, p: Rational) -> Result<Self> {
        let mut supports = vec![vec![(0, Rational::one())]; n];
        for &v in points {
            supports[v] = vec![(0, Rational::one() - p), (value, p)];
        }
        Self::new(supports)
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn support(&self, v: usize) -> &[(u32, Rational)] {
        &self.supports[v]
    }

    pub fn validate(&self, metric: &Metric, capacity: u32) -> Result<()> {
        if self.supports.len() != metric.len() {
            return Err(Error::InvalidDemand(format!(
                "distribution covers {} points, metric has {}",
                self.supports.len(),
                metric.len()
            )));
        }
        for (v, s) in self.supports.iter().enumerate() {
            for &(q, p) in s {
                if p.is_zero() {
                    continue;
                }
                if q > capacity {
                    return Err(Error::DemandExceedsCapacity { point: v, demand: q, capacity });
                }
                if v == metric.root() && q > 0 {
                    return Err(Error::InvalidDemand("the root carries no demand".into()));
                }
            }
        }
        Ok(())
    }

    /// `mu_v = E[q_v]`
    pub fn mean(&self, v: usize) -> Rational {
        self.supports[v]
            .iter()
            .fold(Rational::zero(), |a, &(q, p)| a + Rational::from_integer(q as i128) * p)
    }

    /// `p_v = Pr[q_v > 0]`
    pub fn presence(&self, v: usize) -> Rational {
        self.supports[v].iter().filter(|(q, _)| *q > 0).fold(Rational::zero(), |a, &(_, p)| a + p)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> DemandVector {
        DemandVector::new(
            self.supports
                .iter()
                .map(|s| {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    for &(q, p) in s {
                        acc += rational::to_f64(&p);
                        if u < acc {
                            return q;
                        }
                    }
                    s.iter().rev().find(|(_, p)| !p.is_zero()).map_or(0, |&(q, _)| q)
                })
                .collect(),
        )
    }

    /// Every joint outcome with its probability (zero-probability support
    /// entries skipped), at most `limit` of them.
    pub fn outcomes(&self, limit: usize) -> Result<Vec<(DemandVector, Rational)>> {
        let mut out = vec![(Vec::new(), Rational::one())];
        for s in &self.supports {
            let live: Vec<&(u32, Rational)> = s.iter().filter(|(_, p)| !p.is_zero()).collect();
            if out.len().saturating_mul(live.len()) > limit {
                return Err(Error::TooLarge(format!("more than {limit} joint outcomes")));
            }
            out = out
                .into_iter()
                .flat_map(|(prefix, pr)| {
                    live.iter().map(move |&&(q, p)| {
                        let mut next = prefix.clone();
                        next.push(q);
                        (next, pr * p)
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(|(q, p)| (DemandVector::new(q), p)).collect())
    }
}

/// Seeded sampler over an independent distribution.
#[derive(Debug, Clone)]
pub struct IndepSampler<'a> {
    pub dist: &'a IndepDistribution,
}

impl DemandSampler for IndepSampler<'_> {
    fn sample(&mut self, s: u64) -> Result<DemandVector> {
        Ok(self.dist.sample(&mut seed::rng(s)))
    }
}

/// `m` independent presence sets, `v` included with probability `p_v`.
pub fn draw_presence(dist: &IndepDistribution, m: usize, seed: u64) -> Vec<Vec<usize>> {
    let p: Vec<f64> = (0..dist.len()).map(|v| rational::to_f64(&dist.presence(v))).collect();
    (0..m)
        .map(|i| {
            let mut rng = seed::rng(seed::derive(seed, i as u64));
            (0..dist.len()).filter(|&v| rng.gen::<f64>() < p[v]).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndepLpSolution {
    /// `x[v]`, zero at the root.
    pub x: Vec<f64>,
    pub value: f64,
    pub edges: EdgeIndex,
    /// Fixed-tour tree `z`.
    pub z: Vec<f64>,
    /// Per distinct sample: `(points, multiplicity, z^i)`.
    pub sample_trees: Vec<(Vec<usize>, usize, Vec<f64>)>,
    pub rounds: usize,
    pub cuts_added: usize,
}

impl IndepLpSolution {
    fn cost(&self, metric: &Metric, z: &[f64]) -> f64 {
        self.edges.edges().iter().zip(z).map(|(&(u, v), z)| metric.df(u, v) * z).sum()
    }

    /// `d . z`
    pub fn tree_cost(&self, metric: &Metric) -> f64 {
        self.cost(metric, &self.z)
    }

    /// `d . z^i` for each distinct sample.
    pub fn sample_costs(&self, metric: &Metric) -> Vec<f64> {
        self.sample_trees.iter().map(|(_, _, z)| self.cost(metric, z)).collect()
    }
}

/// The LP over `x` (fixed-tour class indicator), a tree `z` for the fixed
/// class and a tree `z^i` per sample for the recourse class. Identical
/// samples share one tree, weighted by multiplicity.
pub fn solve_indep_lp(
    metric: &Metric,
    dist: &IndepDistribution,
    capacity: u32,
    lambda: Rational,
    samples: &[Vec<usize>],
) -> Result<IndepLpSolution> {
    dist.validate(metric, capacity)?;
    let n = metric.len();
    let r = metric.root();
    let qf = capacity as f64;
    let lam = rational::to_f64(&lambda);
    let m = samples.len().max(1) as f64;
    let mut lp = LpModel::minimize();
    let cust: Vec<usize> = metric.customers().collect();
    let mut x_var = vec![usize::MAX; n];
    for &v in &cust {
        let flow = metric.df(r, v) * rational::to_f64(&dist.mean(v)) / qf;
        lp.add_constant(lam * flow);
        x_var[v] = lp.add_var(format!("x{v}"), 0.0, Some(1.0), flow - lam * flow);
    }
    let edges = EdgeIndex::complete(n);
    let add_tree = |lp: &mut LpModel, tag: &str, weight: f64| -> usize {
        let base = lp.num_vars();
        for &(u, v) in edges.edges() {
            lp.add_var(format!("{tag}{u}_{v}"), 0.0, None, weight * metric.df(u, v));
        }
        base
    };
    let z0 = add_tree(&mut lp, "z", 1.0);
    let mut grouped: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for s in samples {
        let s: Vec<usize> = s.iter().copied().filter(|&v| v != r).collect();
        if !s.is_empty() {
            *grouped.entry(s).or_insert(0) += 1;
        }
    }
    let mut trees: Vec<(Vec<usize>, usize, usize)> = Vec::new();
    for (k, (pts, count)) in grouped.into_iter().enumerate() {
        let base = add_tree(&mut lp, &format!("s{k}_"), lam * count as f64 / m);
        trees.push((pts, count, base));
    }
    let cut_row = |base: usize, side: &[usize]| -> Vec<(usize, f64)> {
        edges.delta(side).into_iter().map(|e| (base + e, 1.0)).collect()
    };
    for &v in &cust {
        let mut row = cut_row(z0, &[v]);
        row.push((x_var[v], -1.0));
        lp.constrain(row, Sense::Ge, 0.0);
    }
    for (pts, _, base) in &trees {
        for &v in pts {
            let mut row = cut_row(*base, &[v]);
            row.push((x_var[v], 1.0));
            lp.constrain(row, Sense::Ge, 1.0);
        }
    }
    let mut sep = |vals: &[f64]| -> Vec<Constraint> {
        let mut out = Vec::new();
        let cap = edges.to_matrix(&vals[z0..z0 + edges.len()]);
        let reqs: Vec<(usize, f64)> = cust.iter().map(|&v| (v, vals[x_var[v]])).collect();
        for c in separate_cuts(&cap, r, &reqs) {
            let mut row = cut_row(z0, &c.side);
            row.push((x_var[c.terminal], -1.0));
            out.push(Constraint::new(row, Sense::Ge, 0.0));
        }
        for (pts, _, base) in &trees {
            let cap = edges.to_matrix(&vals[*base..*base + edges.len()]);
            let reqs: Vec<(usize, f64)> = pts.iter().map(|&v| (v, 1.0 - vals[x_var[v]])).collect();
            for c in separate_cuts(&cap, r, &reqs) {
                let mut row = cut_row(*base, &c.side);
                row.push((x_var[c.terminal], 1.0));
                out.push(Constraint::new(row, Sense::Ge, 1.0));
            }
        }
        out
    };
    let sol = lp.solve_with_cuts(&mut [&mut sep])?;
    let mut x = vec![0.0; n];
    for &v in &cust {
        x[v] = sol.values[x_var[v]].clamp(0.0, 1.0);
    }
    let slice = |base: usize| sol.values[base..base + edges.len()].iter().map(|v| v.max(0.0)).collect::<Vec<f64>>();
    Ok(IndepLpSolution {
        x,
        value: sol.objective,
        z: slice(z0),
        sample_trees: trees.iter().map(|(p, c, b)| (p.clone(), *c, slice(*b))).collect(),
        edges,
        rounds: sol.rounds,
        cuts_added: sol.cuts_added,
    })
}

/// `D1 = {v : x_v > 1/2}`, `D2` the other customers.
pub fn round_indep(metric: &Metric, x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    metric.customers().partition(|&v| x[v] > 0.5)
}

/// `ceil(c ln(n lambda) / ln ln(n lambda))`, at least 1; the denominator is
/// floored at 1 for small arguments.
pub fn beta(n: usize, lambda: Rational, c: f64) -> usize {
    let a = (n as f64 * rational::to_f64(&lambda)).max(std::f64::consts::E);
    let b = c * a.ln() / a.ln().ln().max(1.0);
    (b.ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndepConfig {
    /// Presence samples in the LP.
    pub samples: usize,
    pub c: f64,
    /// Overrides the computed number of copies.
    pub beta: Option<usize>,
    pub eval_samples: usize,
    pub seed: u64,
}

impl Default for IndepConfig {
    fn default() -> Self {
        Self { samples: 64, c: 4.0, beta: None, eval_samples: 200, seed: 0 }
    }
}

/// Deployed solution: `beta` copies of each base route; copy `l` of route
/// `j` sits at index `j * beta + l` of `fixed`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndepPolicy {
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
    pub routes: Vec<detvrp::VrpRoute>,
    pub beta: usize,
    pub fixed: FixedTour,
}

impl IndepPolicy {
    pub fn new(metric: &Metric, dist: &IndepDistribution, capacity: u32, d1: Vec<usize>, d2: Vec<usize>, beta: usize) -> Result<Self> {
        let loads: Vec<(usize, Rational)> = d1.iter().map(|&v| (v, dist.mean(v))).collect();
        let routes = detvrp::approx_vrp_loads(metric, &loads, Rational::from_integer(capacity as i128))?;
        let fixed = FixedTour::new(routes.iter().map(|r| r.tour.clone()).collect()).replicate(beta);
        Ok(Self { d1, d2, routes, beta, fixed })
    }

    /// Fills each route's realized demands into its copies (descending
    /// demand, first fit); the rest, with all of `D2`, goes to a VRP.
    /// Returns the action and `lambda * d(recourse)`.
    pub fn recourse(&self, metric: &Metric, capacity: u32, lambda: Rational, q: &DemandVector) -> Result<(RecourseAction, Rational)> {
        let mut action = RecourseAction::idle(self.fixed.len());
        let mut residual = DemandVector::zeros(metric.len());
        let mut on_route = vec![false; metric.len()];
        for (j, route) in self.routes.iter().enumerate() {
            let mut items: Vec<(usize, u32)> = route.points.iter().map(|&v| (v, q.get(v))).filter(|&(_, d)| d > 0).collect();
            items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut free = vec![capacity; self.beta];
            for (v, d) in items {
                on_route[v] = true;
                match free.iter().position(|&f| f >= d) {
                    Some(l) => {
                        free[l] -= d;
                        action.served[j * self.beta + l].push((v, d));
                    }
                    None => residual.set(v, d),
                }
            }
        }
        for v in q.support() {
            if !on_route[v] {
                residual.set(v, q.get(v));
            }
        }
        for s in action.served.iter_mut() {
            s.sort_unstable();
        }
        let routes = detvrp::approx_vrp_routes(metric, &residual, capacity)?;
        for r in routes {
            let served = r.points.iter().map(|&v| (v, q.get(v))).collect();
            action.recourse.push(ServedTour { tour: r.tour, served });
        }
        let cost = lambda * action.recourse_length();
        Ok((action, cost))
    }

    /// Exact expected objective by enumerating joint outcomes.
    pub fn exact_objective(
        &self,
        metric: &Metric,
        dist: &IndepDistribution,
        capacity: u32,
        lambda: Rational,
        limit: usize,
    ) -> Result<Rational> {
        let mut total = self.fixed.total_length();
        for (q, p) in dist.outcomes(limit)? {
            total += p * self.recourse(metric, capacity, lambda, &q)?.1;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndepOutcome {
    pub lp: IndepLpSolution,
    pub policy: IndepPolicy,
    pub estimate: f64,
    pub std_error: f64,
}

pub fn solve_indep(
    metric: &Metric,
    dist: &IndepDistribution,
    capacity: u32,
    lambda: Rational,
    cfg: &IndepConfig,
) -> Result<IndepOutcome> {
    let samples = draw_presence(dist, cfg.samples, seed::derive(cfg.seed, 1));
    let lp = solve_indep_lp(metric, dist, capacity, lambda, &samples)?;
    let (d1, d2) = round_indep(metric, &lp.x);
    let b = cfg.beta.unwrap_or_else(|| beta(metric.len(), lambda, cfg.c));
    let policy = IndepPolicy::new(metric, dist, capacity, d1, d2, b)?;
    let mut costs = Vec::with_capacity(cfg.eval_samples);
    for i in 0..cfg.eval_samples {
        let q = dist.sample(&mut seed::rng(seed::derive(cfg.seed, 1000 + i as u64)));
        costs.push(rational::to_f64(&policy.recourse(metric, capacity, lambda, &q)?.1));
    }
    let (mean, se) = mean_and_error(&costs);
    let estimate = rational::to_f64(&policy.fixed.total_length()) + mean;
    Ok(IndepOutcome { lp, policy, estimate, std_error: se })
}

/// `T(x)`: expected spanning-tree length over `{r}` and the points present
/// outside `D1`, by enumerating presence patterns.
pub fn exact_tree_term(metric: &Metric, dist: &IndepDistribution, in_d1: &[bool]) -> Result<f64> {
    let cand: Vec<usize> = metric.customers().filter(|&v| !in_d1[v] && !dist.presence(v).is_zero()).collect();
    if cand.len() > 16 {
        return Err(Error::TooLarge("presence enumeration beyond 16 points".into()));
    }
    let p: Vec<f64> = cand.iter().map(|&v| rational::to_f64(&dist.presence(v))).collect();
    let mut total = 0.0;
    for mask in 0usize..(1 << cand.len()) {
        let mut pr = 1.0;
        let mut pts = Vec::new();
        for (b, &v) in cand.iter().enumerate() {
            if mask & (1 << b) != 0 {
                pr *= p[b];
                pts.push(v);
            } else {
                pr *= 1.0 - p[b];
            }
        }
        if pr > 0.0 {
            total += pr * rational::to_f64(&detvrp::mst_length(metric, &pts));
        }
    }
    Ok(total)
}

/// `T^(x)` over presence samples.
pub fn sampled_tree_term(metric: &Metric, samples: &[Vec<usize>], in_d1: &[bool]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples
        .iter()
        .map(|s| {
            let pts: Vec<usize> = s.iter().copied().filter(|&v| !in_d1[v] && v != metric.root()).collect();
            rational::to_f64(&detvrp::mst_length(metric, &pts))
        })
        .sum::<f64>()
        / samples.len() as f64
}

/// Monte-Carlo frequency of a route's realized demand exceeding
/// `beta * capacity`.
pub fn overflow_frequency(dist: &IndepDistribution, route: &[usize], beta: usize, capacity: u32, trials: usize, seed: u64) -> f64 {
    let limit = beta as u64 * capacity as u64;
    let hits = (0..trials)
        .filter(|&t| {
            let q = dist.sample(&mut seed::rng(seed::derive(seed, t as u64)));
            route.iter().map(|&v| q.get(v) as u64).sum::<u64>() > limit
        })
        .count();
    hits as f64 / trials.max(1) as f64
}

/// Copies of an r-tour list, for callers building policies by hand.
pub fn replicate_routes(routes: &[RTour], beta: usize) -> FixedTour {
    FixedTour::new(routes.to_vec()).replicate(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::tri_metric;
    use crate::rational::{frac, int};

    #[test]
    fn moments() {
        let d = IndepDistribution::new(vec![
            vec![(0, int(1))],
            vec![(0, frac(1, 2)), (2, frac(1, 2))],
            vec![(1, frac(1, 4)), (3, frac(3, 4))],
        ])
        .unwrap();
        assert_eq!(d.mean(1), int(1));
        assert_eq!(d.presence(1), frac(1, 2));
        assert_eq!(d.mean(2), frac(10, 4));
        assert_eq!(d.presence(2), int(1));
        let outs = d.outcomes(100).unwrap();
        assert_eq!(outs.len(), 4);
        assert_eq!(rational::sum(outs.iter().map(|(_, p)| p)), int(1));
        assert!(IndepDistribution::new(vec![vec![(0, frac(1, 2))]]).is_err());
    }

    #[test]
    fn zero_presence_lp() {
        let m = tri_metric();
        let d = IndepDistribution::point_mass(&DemandVector::zeros(3));
        let lp = solve_indep_lp(&m, &d, 1, int(3), &draw_presence(&d, 4, 0)).unwrap();
        assert!(lp.value.abs() < 1e-9);
    }

    #[test]
    fn single_point_cases() {
        // d(r,a) = 1, Q = 1, q_a = 1 surely: fixed costs 2*1 (tree + flow),
        // recourse costs lambda * 2.
        let m = tri_metric();
        let d = IndepDistribution::point_mass(&DemandVector::new(vec![0, 1, 0]));
        for (lam, want) in [(1, 2.0f64), (3, 2.0)] {
            let samples = draw_presence(&d, 3, 0);
            let lp = solve_indep_lp(&m, &d, 1, int(lam), &samples).unwrap();
            let recourse = lam as f64 * 2.0;
            assert!((lp.value - want.min(recourse)).abs() < 1e-9, "lambda {lam}: {}", lp.value);
        }
    }

    #[test]
    fn threshold_rounding() {
        let m = tri_metric();
        assert_eq!(round_indep(&m, &[0.0, 1.0, 1.0]), (vec![1, 2], vec![]));
        assert_eq!(round_indep(&m, &[0.0, 0.0, 0.0]), (vec![], vec![1, 2]));
        assert_eq!(round_indep(&m, &[0.0, 0.6, 0.4]), (vec![1], vec![2]));
        assert_eq!(round_indep(&m, &[0.0, 0.5, 0.4]).0, Vec::<usize>::new());
    }

    #[test]
    fn deterministic_fitting_demands_cost_nothing() {
        let m = tri_metric();
        let q = DemandVector::new(vec![0, 1, 1]);
        let d = IndepDistribution::point_mass(&q);
        let pol = IndepPolicy::new(&m, &d, 2, vec![1, 2], vec![], 2).unwrap();
        let (act, cost) = pol.recourse(&m, 2, int(5), &q).unwrap();
        assert!(cost.is_zero());
        act.validate(&m, &pol.fixed, 2, 0, &q).unwrap();
    }

    #[test]
    fn all_recourse_policy() {
        let m = tri_metric();
        let d = IndepDistribution::bernoulli(3, &[1, 2], 1, frac(1, 2)).unwrap();
        let pol = IndepPolicy::new(&m, &d, 1, vec![], vec![1, 2], 3).unwrap();
        assert!(pol.fixed.is_empty());
        // lambda * E[VRP]: a alone 2, b alone 4, both 6 (Q = 1).
        let obj = pol.exact_objective(&m, &d, 1, int(2), 64).unwrap();
        assert_eq!(obj, int(2) * (frac(1, 4) * int(2) + frac(1, 4) * int(4) + frac(1, 4) * int(6)));
    }

    #[test]
    fn beta_grows_slowly() {
        assert!(beta(4, int(4), 4.0) >= 1);
        assert!(beta(100, int(100), 4.0) >= beta(4, int(4), 4.0));
    }
}
