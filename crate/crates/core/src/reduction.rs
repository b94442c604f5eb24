//! Black-box distributions: guess the optimum scale, restrict and contract
//! the metric, sample explicit scenarios, solve, lift, deploy.

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{DemandVector, Demands, FixedTour, Metric, RTour, ScenarioSet, StochVrpInstance};
use crate::rational::{self, Rational};
use crate::recourse::{self, COPIES};
use crate::seed;
use crate::setcover::{self, SetCoverConfig};

/// A demand distribution accessed only through sampling. Deterministic in
/// the seed.
pub trait DemandSampler {
    fn sample(&mut self, seed: u64) -> Result<DemandVector>;
}

impl<F: FnMut(u64) -> Result<DemandVector>> DemandSampler for F {
    fn sample(&mut self, seed: u64) -> Result<DemandVector> {
        self(seed)
    }
}

/// Uniform draw from an explicit scenario list.
#[derive(Debug, Clone)]
pub struct EmpiricalSampler {
    pub scenarios: ScenarioSet,
}

impl DemandSampler for EmpiricalSampler {
    fn sample(&mut self, s: u64) -> Result<DemandVector> {
        use rand::Rng;
        let i = seed::rng(s).gen_range(0..self.scenarios.len());
        Ok(self.scenarios.get(i).clone())
    }
}

/// `m` draws with seeds derived from `seed`.
pub fn draw(sampler: &mut dyn DemandSampler, m: usize, seed: u64) -> Result<Vec<DemandVector>> {
    (0..m).map(|i| sampler.sample(seed::derive(seed, i as u64))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCount {
    /// The unclipped bound `ceil(8 lambda^2 n^2 D^2 log|X|)`.
    pub required: f64,
    pub used: usize,
    pub capped: bool,
}

/// Scenario count for uniform concentration; `log_x` defaults to
/// `n^2 ln 2`.
pub fn sample_count(n: usize, lambda: Rational, diameter: Rational, log_x: Option<f64>, m_max: usize) -> Result<SampleCount> {
    if lambda < Rational::from_integer(1) {
        return Err(Error::InvalidInstance("lambda must be at least 1".into()));
    }
    if n == 0 || diameter <= Rational::zero() {
        return Err(Error::InvalidInstance("sample count needs n >= 1 and a positive diameter".into()));
    }
    let nf = n as f64;
    let log_x = log_x.unwrap_or(nf * nf * std::f64::consts::LN_2);
    let l = rational::to_f64(&lambda);
    let d = rational::to_f64(&diameter);
    let required = (8.0 * l * l * nf * nf * d * d * log_x).ceil();
    let capped = required > m_max as f64;
    if capped {
        log::warn!("sample count {required} exceeds the ceiling {m_max}; using {m_max} scenarios");
    }
    let used = if capped { m_max } else { required as usize };
    Ok(SampleCount { required, used, capped })
}

/// Quotient of the near part of a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedMetric {
    pub metric: Metric,
    /// Original points merged into each quotient point; the root's class
    /// comes first.
    pub classes: Vec<Vec<usize>>,
    /// Quotient point of every original point, `None` beyond the budget.
    pub class_of: Vec<Option<usize>>,
    pub threshold: Rational,
    pub budget: Rational,
}

impl ContractedMetric {
    /// Quotient diameter in units of the contraction threshold.
    pub fn scaled_diameter(&self) -> Rational {
        if self.threshold.is_zero() {
            return self.metric.diameter();
        }
        self.metric.diameter() / self.threshold
    }

    /// Points beyond the budget radius.
    pub fn far_points(&self) -> Vec<usize> {
        (0..self.class_of.len()).filter(|&v| self.class_of[v].is_none()).collect()
    }

    /// Aggregated quotient demand, clipped at `capacity`. Demand beyond the
    /// budget or inside the root's class is left out.
    pub fn project(&self, q: &DemandVector, capacity: u32) -> DemandVector {
        let mut out = DemandVector::zeros(self.classes.len());
        for v in q.support() {
            if let Some(w) = self.class_of[v] {
                if w != self.metric.root() {
                    out.set(w, (out.get(w) + q.get(v)).min(capacity));
                }
            }
        }
        out
    }

    /// Replaces every visit of a quotient point by a preorder walk of the
    /// minimum spanning tree of its class.
    pub fn lift_tour(&self, original: &Metric, tour: &RTour) -> RTour {
        let mut pts = Vec::new();
        for &w in tour.seq() {
            if w == self.metric.root() {
                continue;
            }
            pts.extend(class_walk(original, &self.classes[w]));
        }
        RTour::through(original, &pts)
    }

    pub fn lift(&self, original: &Metric, fixed: &FixedTour) -> FixedTour {
        FixedTour::new(fixed.rtours().iter().map(|t| self.lift_tour(original, t)).collect())
    }
}

/// Preorder of a minimum spanning tree over `class`, rooted at its first
/// member.
fn class_walk(metric: &Metric, class: &[usize]) -> Vec<usize> {
    let k = class.len();
    if k <= 1 {
        return class.to_vec();
    }
    let mut in_tree = vec![false; k];
    let mut key = vec![None::<Rational>; k];
    let mut parent = vec![0usize; k];
    key[0] = Some(Rational::zero());
    let mut children = vec![Vec::new(); k];
    for _ in 0..k {
        let u = (0..k)
            .filter(|&i| !in_tree[i] && key[i].is_some())
            .min_by(|&a, &b| key[a].cmp(&key[b]).then(a.cmp(&b)))
            .expect("connected");
        in_tree[u] = true;
        if u != 0 {
            children[parent[u]].push(u);
        }
        for v in 0..k {
            let d = metric.d(class[u], class[v]);
            if !in_tree[v] && key[v].map_or(true, |kv| d < kv) {
                key[v] = Some(d);
                parent[v] = u;
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        out.push(class[u]);
        for &c in children[u].iter().rev() {
            stack.push(c);
        }
    }
    out
}

/// Restricts to `{v : d(r,v) <= budget}`, merges points joined by edges
/// shorter than `budget / n^3`, and takes shortest paths between classes.
pub fn contract_metric(metric: &Metric, budget: Rational) -> Result<ContractedMetric> {
    if budget <= Rational::zero() {
        return Err(Error::InvalidInstance("budget must be positive".into()));
    }
    let n = metric.len();
    let r = metric.root();
    let n3 = Rational::from_integer((n as i128).pow(3));
    let threshold = budget / n3;
    let inside: Vec<usize> = (0..n).filter(|&v| metric.d(r, v) <= budget).collect();
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for (a, &u) in inside.iter().enumerate() {
        for &v in &inside[a + 1..] {
            if metric.d(u, v) < threshold {
                let (ru, rv) = (find(&mut uf, u), find(&mut uf, v));
                if ru != rv {
                    uf[ru.max(rv)] = ru.min(rv);
                }
            }
        }
    }
    let root_rep = find(&mut uf, r);
    let mut reps: Vec<usize> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![None; n];
    let mut order = inside.clone();
    // Root class first, then by smallest member.
    order.sort_by_key(|&v| (find(&mut uf, v) != root_rep, v));
    for v in order {
        let rep = find(&mut uf, v);
        let w = match reps.iter().position(|&x| x == rep) {
            Some(w) => w,
            None => {
                reps.push(rep);
                classes.push(Vec::new());
                reps.len() - 1
            }
        };
        classes[w].push(v);
        class_of[v] = Some(w);
    }
    for c in classes.iter_mut() {
        c.sort_unstable();
    }
    // Root first within its class.
    if let Some(p) = classes[0].iter().position(|&v| v == r) {
        classes[0].swap(0, p);
        classes[0][1..].sort_unstable();
    }
    let k = classes.len();
    let mut dist = vec![vec![Rational::zero(); k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let d = classes[a]
                .iter()
                .flat_map(|&u| classes[b].iter().map(move |&v| (u, v)))
                .map(|(u, v)| metric.d(u, v))
                .min()
                .unwrap_or_else(Rational::zero);
            dist[a][b] = d;
            dist[b][a] = d;
        }
    }
    let names = classes
        .iter()
        .map(|c| c.iter().map(|&v| metric.name(v)).collect::<Vec<_>>().join("+"))
        .collect();
    let quotient = Metric::from_closure(names, 0, dist)?;
    Ok(ContractedMetric { metric: quotient, classes, class_of, threshold, budget })
}

/// Replaces a fixed tour with more r-tours than customers by singleton
/// r-tours to the nearest customers plus the far r-tours; neither the
/// length nor any scenario's recourse cost increases.
pub fn normalize_fixed_tour(metric: &Metric, fixed: &FixedTour) -> FixedTour {
    let r = metric.root();
    let mut cust: Vec<usize> = metric.customers().collect();
    let n = cust.len();
    if fixed.len() <= n {
        return fixed.clone();
    }
    cust.sort_by(|&a, &b| metric.d(r, a).cmp(&metric.d(r, b)).then(a.cmp(&b)));
    let mut rank = vec![0usize; metric.len()];
    for (i, &v) in cust.iter().enumerate() {
        rank[v] = i + 1;
    }
    // Highest-ranked customer of each r-tour; tours through no customer are
    // dropped.
    let tops: Vec<(usize, usize)> = fixed
        .rtours()
        .iter()
        .enumerate()
        .filter_map(|(j, t)| t.seq().iter().map(|&v| rank[v]).max().filter(|&m| m > 0).map(|m| (j, m)))
        .collect();
    let mut k = n + 1;
    for kk in 1..=n {
        if tops.iter().filter(|&&(_, m)| m >= kk).count() <= n - kk {
            k = kk;
            break;
        }
    }
    let mut out = FixedTour::empty();
    for &v in &cust[..k - 1] {
        out.push(RTour::through(metric, &[v]));
    }
    for &(j, m) in &tops {
        if m >= k {
            out.push(fixed.rtours()[j].clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlackBoxConfig {
    pub setcover: SetCoverConfig,
    pub m_max: usize,
    /// Overrides the computed scenario count when set.
    pub samples: Option<usize>,
    /// Fresh draws used to estimate each candidate's objective.
    pub eval_samples: usize,
    /// Keeps only the first this-many budget guesses.
    pub max_budgets: Option<usize>,
    pub seed: u64,
}

impl Default for BlackBoxConfig {
    fn default() -> Self {
        Self {
            setcover: SetCoverConfig::default(),
            m_max: 10_000,
            samples: None,
            eval_samples: 200,
            max_budgets: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetCandidate {
    pub budget: Rational,
    pub classes: usize,
    pub samples: SampleCount,
    /// Lifted first-stage tour before replication.
    pub base: FixedTour,
    /// Greedy objective on the sampled contracted instance.
    pub explicit_objective: Rational,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlackBoxOutcome {
    /// The deployed fixed tour: `COPIES` copies of `base`.
    pub fixed: FixedTour,
    pub base: FixedTour,
    pub budget: Rational,
    pub estimate: f64,
    pub std_error: f64,
    pub candidates: Vec<BudgetCandidate>,
}

/// Budget guesses: powers of two over `[max d(r,.), 2 n max d(r,.)]`.
pub fn budget_sweep(metric: &Metric) -> Vec<Rational> {
    let r = metric.root();
    let far = metric.customers().map(|v| metric.d(r, v)).max().unwrap_or_else(Rational::zero);
    if far.is_zero() {
        return vec![Rational::from_integer(1)];
    }
    let hi = far * Rational::from_integer(2 * metric.len() as i128);
    let mut out = Vec::new();
    let mut b = far;
    while b <= hi {
        out.push(b);
        b *= Rational::from_integer(2);
    }
    out
}

/// Monte-Carlo objective of deploying `COPIES` copies of `base` with the
/// rounding recourse: `(mean, standard error)` over `m` draws.
pub fn sampled_objective(
    metric: &Metric,
    capacity: u32,
    lambda: Rational,
    base: &FixedTour,
    sampler: &mut dyn DemandSampler,
    m: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let draws = draw(sampler, m, seed)?;
    let costs = recourse_costs(metric, capacity, lambda, base, &draws)?;
    let first = rational::to_f64(&base.total_length()) * COPIES as f64;
    let (mean, se) = mean_and_error(&costs);
    Ok((first + mean, se))
}

fn recourse_costs(metric: &Metric, capacity: u32, lambda: Rational, base: &FixedTour, draws: &[DemandVector]) -> Result<Vec<f64>> {
    let probe = StochVrpInstance::new(
        metric.clone(),
        capacity,
        lambda,
        Demands::Scenarios(ScenarioSet::new(vec![DemandVector::zeros(metric.len())])?),
    )?;
    let mut memo: std::collections::HashMap<DemandVector, f64> = std::collections::HashMap::new();
    draws
        .iter()
        .map(|q| {
            if let Some(&c) = memo.get(q) {
                return Ok(c);
            }
            let (_, cost, _) = recourse::recourse_for(&probe, base, q)?;
            let c = rational::to_f64(&cost);
            memo.insert(q.clone(), c);
            Ok(c)
        })
        .collect()
}

pub fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// The full pipeline for a black-box demand distribution.
pub fn solve_black_box(
    metric: &Metric,
    capacity: u32,
    lambda: Rational,
    sampler: &mut dyn DemandSampler,
    cfg: &BlackBoxConfig,
) -> Result<BlackBoxOutcome> {
    if capacity == 0 {
        return Err(Error::InvalidInstance("capacity must be positive".into()));
    }
    if lambda < Rational::from_integer(1) {
        return Err(Error::InvalidInstance("lambda must be at least 1".into()));
    }
    let eval = draw(sampler, cfg.eval_samples.max(1), seed::derive(cfg.seed, 0xE7A1))?;
    for q in &eval {
        q.validate(metric, capacity).map_err(|e| Error::SamplerFailure(e.to_string()))?;
    }
    let mut candidates = Vec::new();
    for (bi, budget) in budget_sweep(metric).into_iter().take(cfg.max_budgets.unwrap_or(usize::MAX)).enumerate() {
        let cm = contract_metric(metric, budget)?;
        let diam = cm.scaled_diameter().ceil();
        let samples = if cm.metric.diameter().is_zero() {
            SampleCount { required: 1.0, used: 1, capped: false }
        } else {
            sample_count(cm.metric.len(), lambda, diam, None, cfg.m_max)?
        };
        let m = cfg.samples.unwrap_or(samples.used).max(1);
        let raw = draw(sampler, m, seed::derive(cfg.seed, bi as u64))?;
        let mut scen = Vec::with_capacity(m);
        for q in &raw {
            q.validate(metric, capacity).map_err(|e| Error::SamplerFailure(e.to_string()))?;
            scen.push(cm.project(q, capacity));
        }
        let inst = StochVrpInstance::new(cm.metric.clone(), capacity, lambda, Demands::Scenarios(ScenarioSet::new(scen)?))?;
        let mut sc = cfg.setcover.clone();
        sc.kro.seed = seed::derive(cfg.seed, 0x5C00 + bi as u64);
        let out = setcover::greedy_set_cover(&inst, &sc)?;
        let base = normalize_fixed_tour(metric, &cm.lift(metric, &out.fixed));
        let costs = recourse_costs(metric, capacity, lambda, &base, &eval)?;
        let (mean, se) = mean_and_error(&costs);
        let estimate = rational::to_f64(&base.total_length()) * COPIES as f64 + mean;
        candidates.push(BudgetCandidate {
            budget,
            classes: cm.classes.len(),
            samples: SampleCount { used: m, ..samples },
            base,
            explicit_objective: out.total_cost,
            estimate,
            std_error: se,
        });
    }
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Invariant("empty budget sweep".into()))?;
    let c = &candidates[best];
    Ok(BlackBoxOutcome {
        fixed: c.base.replicate(COPIES),
        base: c.base.clone(),
        budget: c.budget,
        estimate: c.estimate,
        std_error: c.std_error,
        candidates: candidates.clone(),
    })
}

/// Integral rescaling factor: the least common multiple of all distance
/// denominators.
pub fn integral_scale(metric: &Metric) -> Rational {
    let mut l: i128 = 1;
    for row in metric.matrix() {
        for d in row {
            l = num_integer::lcm(l, *d.denom());
        }
    }
    Rational::from_integer(l)
}

/// Smallest integer at least `x`.
pub fn ceil_int(x: Rational) -> i128 {
    x.ceil().to_integer().to_i128().unwrap_or(i128::MAX)
}
