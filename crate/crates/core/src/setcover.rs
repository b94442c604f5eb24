//! Set-cover view of explicit-scenario StochVRP and its greedy driver.
//!
//! Elements are the positive demands `(i, v)`. A first-stage set is an
//! r-tour plus, per scenario, a capacity-feasible subset of its visited
//! demands, priced at the tour length. A second-stage set is an r-tour in
//! one scenario, priced at `lambda / m` times its length.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use num_traits::Zero;

use crate::detvrp;
use crate::error::{Error, Result};
use crate::kro::{self, KnapRankInstance, KroConfig};
use crate::model::{FixedTour, Metric, RTour, RecourseAction, ScenarioSet, ServedTour, StochVrpInstance};
use crate::oracle::HeldKarp;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverElement {
    pub scenario: usize,
    pub point: usize,
    pub demand: u32,
}

/// All positive demands, ordered by scenario then point.
pub fn build_ground_set(set: &ScenarioSet) -> Vec<CoverElement> {
    let mut out = Vec::new();
    for (i, q) in set.scenarios().iter().enumerate() {
        for v in q.support() {
            out.push(CoverElement { scenario: i, point: v, demand: q.get(v) });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PickKind {
    FirstStage,
    SecondStage(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PickedSet {
    pub kind: PickKind,
    pub tour: RTour,
    /// Indices into the ground set.
    pub covered: Vec<usize>,
    pub cost: Rational,
    /// Upper bound on the best coverage-to-cost ratio of this kind, when
    /// one could be certified.
    pub bound: Option<f64>,
}

impl PickedSet {
    pub fn ratio(&self) -> f64 {
        let c = rational::to_f64(&self.cost);
        if c > 0.0 {
            self.covered.len() as f64 / c
        } else {
            f64::INFINITY
        }
    }

    /// Exact comparison of coverage-to-cost ratios.
    pub fn beats(&self, other: &PickedSet) -> std::cmp::Ordering {
        let a = Rational::from_integer(self.covered.len() as i128) * other.cost;
        let b = Rational::from_integer(other.covered.len() as i128) * self.cost;
        match (self.cost.is_zero(), other.cost.is_zero()) {
            (true, true) => self.covered.len().cmp(&other.covered.len()),
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => a.cmp(&b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetCoverConfig {
    pub kro: KroConfig,
    /// Largest candidate set handled by exact subset dynamic programming.
    pub exact_limit: usize,
    /// Refine first-stage tours by add/drop moves.
    pub local_search: bool,
}

impl Default for SetCoverConfig {
    fn default() -> Self {
        Self { kro: KroConfig::default(), exact_limit: 15, local_search: true }
    }
}

/// Tour-length guesses: 0 plus powers of two over
/// `[2 min d(r,.), 2 n max d(r,.)]`.
fn length_grid(metric: &Metric, pts: &[usize]) -> Vec<f64> {
    let r = metric.root();
    let ds: Vec<f64> = pts.iter().map(|&v| metric.df(r, v)).filter(|&d| d > 0.0).collect();
    let mut grid = vec![0.0];
    if let (Some(lo), Some(hi)) = (
        ds.iter().copied().reduce(f64::min),
        ds.iter().copied().reduce(f64::max),
    ) {
        grid.extend(kro::budget_grid(2.0 * lo, 2.0 * metric.len() as f64 * hi, None));
    }
    grid
}

/// Best second-stage set: per scenario and per length guess, the largest
/// capacity-feasible subset routable within the guess.
pub fn second_stage_best_ratio(
    inst: &StochVrpInstance,
    elements: &[CoverElement],
    uncovered: &[bool],
    cfg: &SetCoverConfig,
) -> Option<PickedSet> {
    let metric = &inst.metric;
    let m = inst.scenarios().map_or(1, |s| s.len());
    let scale = inst.lambda / Rational::from_integer(m as i128);
    let scale_f = rational::to_f64(&scale);
    let mut best: Option<PickedSet> = None;
    let mut bound: f64 = 0.0;
    let mut by_scenario = vec![Vec::new(); m];
    for (e, el) in elements.iter().enumerate() {
        if uncovered[e] {
            by_scenario[el.scenario].push(e);
        }
    }
    let mut seen: HashSet<Vec<(usize, u32)>> = HashSet::new();
    for (i, ids) in by_scenario.into_iter().enumerate() {
        if ids.is_empty() {
            continue;
        }
        // Identical residual scenarios yield identical candidates.
        if !seen.insert(ids.iter().map(|&e| (elements[e].point, elements[e].demand)).collect()) {
            continue;
        }
        let pts: Vec<usize> = ids.iter().map(|&e| elements[e].point).collect();
        let loads: Vec<u32> = ids.iter().map(|&e| elements[e].demand).collect();
        let grid = length_grid(metric, &pts);
        let mut cands: Vec<(Vec<usize>, RTour)> = Vec::new();
        if pts.len() <= cfg.exact_limit {
            let hk = HeldKarp::new(metric, &pts);
            let k = pts.len();
            let feasible: Vec<usize> = (1..(1usize << k))
                .filter(|&mask| {
                    let load: u64 = (0..k).filter(|&b| mask & (1 << b) != 0).map(|b| loads[b] as u64).sum();
                    load <= inst.capacity as u64
                })
                .collect();
            for &mask in &feasible {
                let len = hk.cost(mask);
                let r = if len > 0.0 { mask.count_ones() as f64 / (scale_f * len) } else { f64::INFINITY };
                bound = bound.max(r);
            }
            for &limit in &grid {
                let mut pick: Option<usize> = None;
                for &mask in &feasible {
                    if hk.cost(mask) > limit + 1e-9 {
                        continue;
                    }
                    let better = match pick {
                        None => true,
                        Some(p) => {
                            let (a, b) = (mask.count_ones(), p.count_ones());
                            a > b || (a == b && hk.cost(mask) < hk.cost(p) - 1e-12)
                        }
                    };
                    if better {
                        pick = Some(mask);
                    }
                }
                if let Some(mask) = pick {
                    let chosen = (0..k).filter(|&b| mask & (1 << b) != 0).map(|b| ids[b]).collect();
                    cands.push((chosen, hk.tour(metric, mask)));
                }
            }
        } else {
            let r = metric.root();
            let mut order: Vec<usize> = (0..pts.len()).collect();
            order.sort_by(|&a, &b| metric.df(r, pts[a]).total_cmp(&metric.df(r, pts[b])).then(pts[a].cmp(&pts[b])));
            // Any k-subset is at least twice the k-th smallest depot distance
            // long, and at most as many demands fit as the smallest ones allow.
            let mut by_load = loads.clone();
            by_load.sort_unstable();
            let mut fit = 0usize;
            let mut acc = 0u64;
            for q in by_load {
                acc += q as u64;
                if acc > inst.capacity as u64 {
                    break;
                }
                fit += 1;
            }
            for kk in 1..=fit {
                let dk = metric.df(r, pts[order[kk - 1]]);
                let rb = if dk > 0.0 { kk as f64 / (scale_f * 2.0 * dk) } else { f64::INFINITY };
                bound = bound.max(rb);
            }
            for &limit in &grid {
                let mut chosen: Vec<usize> = Vec::new();
                let mut load = 0u64;
                for &b in &order {
                    if load + loads[b] as u64 > inst.capacity as u64 {
                        continue;
                    }
                    let mut trial: Vec<usize> = chosen.iter().map(|&c| pts[c]).collect();
                    trial.push(pts[b]);
                    if rational::to_f64(&detvrp::approx_tsp(metric, &trial).length()) <= limit + 1e-9 {
                        chosen.push(b);
                        load += loads[b] as u64;
                    }
                }
                if !chosen.is_empty() {
                    let tour_pts: Vec<usize> = chosen.iter().map(|&c| pts[c]).collect();
                    cands.push((chosen.iter().map(|&c| ids[c]).collect(), detvrp::approx_tsp(metric, &tour_pts)));
                }
            }
        }
        for (covered, tour) in cands {
            let cost = scale * tour.length();
            let cand = PickedSet { kind: PickKind::SecondStage(i), tour, covered, cost, bound: None };
            if best.as_ref().map_or(true, |b| cand.beats(b) == std::cmp::Ordering::Greater) {
                best = Some(cand);
            }
        }
    }
    best.map(|mut b| {
        b.bound = Some(bound);
        b
    })
}

/// Per scenario, the largest number of listed demands at `visited`
/// points fitting in one vehicle (smallest demands first, ties by point).
fn first_stage_cover(
    elements: &[CoverElement],
    by_scenario: &[Vec<usize>],
    visited: &[bool],
    capacity: u32,
) -> Vec<usize> {
    let mut out = Vec::new();
    for ids in by_scenario {
        let mut cand: Vec<usize> = ids.iter().copied().filter(|&e| visited[elements[e].point]).collect();
        cand.sort_by_key(|&e| (elements[e].demand, elements[e].point));
        let mut load = 0u64;
        for e in cand {
            if load + elements[e].demand as u64 <= capacity as u64 {
                load += elements[e].demand as u64;
                out.push(e);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Best first-stage set: ratio orienteering with one knapsack per
/// scenario (unit profits, sizes `q / Q`), optionally refined by local
/// search; coverage is the exact per-scenario knapsack optimum.
pub fn first_stage_best_ratio(
    inst: &StochVrpInstance,
    elements: &[CoverElement],
    uncovered: &[bool],
    cfg: &SetCoverConfig,
) -> Result<Option<PickedSet>> {
    let metric = &inst.metric;
    let n = metric.len();
    let m = inst.scenarios().map_or(1, |s| s.len());
    let mut by_scenario = vec![Vec::new(); m];
    for (e, el) in elements.iter().enumerate() {
        if uncovered[e] {
            by_scenario[el.scenario].push(e);
        }
    }
    // Scenarios with identical residual demand form one knapsack whose
    // profits are scaled by the multiplicity.
    let mut groups: BTreeMap<Vec<(usize, u32)>, (usize, usize)> = BTreeMap::new();
    for (i, ids) in by_scenario.iter().enumerate() {
        if ids.is_empty() {
            continue;
        }
        let sig = ids.iter().map(|&e| (elements[e].point, elements[e].demand)).collect();
        groups.entry(sig).or_insert((i, 0)).1 += 1;
    }
    if groups.is_empty() {
        return Ok(None);
    }
    let q = inst.capacity as f64;
    let mut profits = Vec::new();
    let mut sizes = Vec::new();
    let mut reps: Vec<(usize, usize)> = groups.values().copied().collect();
    reps.sort_unstable();
    for &(i, count) in &reps {
        let mut w = vec![0.0; n];
        let mut c = vec![0.0; n];
        for &e in &by_scenario[i] {
            w[elements[e].point] = count as f64;
            c[elements[e].point] = elements[e].demand as f64 / q;
        }
        profits.push(w);
        sizes.push(c);
    }
    let kinst = KnapRankInstance::new(profits, sizes)?;
    let kro_res = match kro::ratio_kro(metric, &kinst, &cfg.kro) {
        Ok(r) => Some(r),
        Err(Error::NoProfit) => None,
        Err(e) => return Err(e),
    };

    let mut cand_pts: Vec<usize> = elements
        .iter()
        .enumerate()
        .filter(|&(e, _)| uncovered[e])
        .map(|(_, el)| el.point)
        .collect();
    cand_pts.sort_unstable();
    cand_pts.dedup();
    let hk = (cand_pts.len() <= cfg.exact_limit).then(|| HeldKarp::new(metric, &cand_pts));
    let tour_for = |set: &[usize]| -> RTour {
        match &hk {
            Some(h) => h.tour(metric, h.mask_of(set)),
            None => detvrp::approx_tsp(metric, set),
        }
    };
    let visited_of = |set: &[usize]| -> Vec<bool> {
        let mut visited = vec![false; n];
        for &v in set {
            visited[v] = true;
        }
        visited
    };
    let coverage = |set: &[usize]| -> Vec<usize> {
        first_stage_cover(elements, &by_scenario, &visited_of(set), inst.capacity)
    };
    let rep_lists: Vec<Vec<usize>> = reps.iter().map(|&(i, _)| by_scenario[i].clone()).collect();
    // Elements covered, and elements sitting on visited points but left
    // uncovered (for tie-breaking), both weighted by multiplicity.
    let coverage_stats = |set: &[usize]| -> (usize, usize) {
        let visited = visited_of(set);
        let mut cov = 0;
        let mut stranded = 0;
        for (&(_, count), ids) in reps.iter().zip(&rep_lists) {
            let got = first_stage_cover(elements, std::slice::from_ref(ids), &visited, inst.capacity).len();
            let on_tour = ids.iter().filter(|&&e| visited[elements[e].point]).count();
            cov += count * got;
            stranded += count * (on_tour - got);
        }
        (cov, stranded)
    };
    let coverage_count = |set: &[usize]| -> usize { coverage_stats(set).0 };
    let score = |set: &[usize]| -> (usize, f64, usize) {
        let (cov, stranded) = coverage_stats(set);
        let len = match &hk {
            Some(h) => h.cost(h.mask_of(set)),
            None => rational::to_f64(&detvrp::approx_tsp(metric, set).length()),
        };
        (cov, len, stranded)
    };
    let better = |a: (usize, f64, usize), b: (usize, f64, usize)| -> bool {
        // a.cov / a.len > b.cov / b.len, zero lengths first.
        let lhs = a.0 as f64 * b.1;
        let rhs = b.0 as f64 * a.1;
        if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
            return true;
        }
        lhs >= rhs * (1.0 - 1e-12) && (a.0 > b.0 || (a.0 == b.0 && a.2 < b.2))
    };

    let mut starts: Vec<Vec<usize>> = Vec::new();
    if let Some(r) = &kro_res {
        starts.push(r.tour.points(metric));
    }
    if cfg.local_search {
        starts.push(Vec::new());
    }
    let mut best_set: Option<Vec<usize>> = None;
    for start in starts {
        let mut cur = start;
        cur.retain(|v| cand_pts.contains(v));
        if cfg.local_search {
            loop {
                let here = score(&cur);
                let mut best_move: Option<(Vec<usize>, (usize, f64, usize))> = None;
                let mut neighbours: Vec<Vec<usize>> = Vec::new();
                for &v in &cand_pts {
                    let mut next = cur.clone();
                    match next.iter().position(|&x| x == v) {
                        Some(k) => {
                            next.remove(k);
                        }
                        None => {
                            next.push(v);
                            next.sort_unstable();
                        }
                    }
                    neighbours.push(next);
                }
                for &out in &cur {
                    for &v in cand_pts.iter().filter(|v| !cur.contains(v)) {
                        let mut next: Vec<usize> = cur.iter().copied().filter(|&x| x != out).collect();
                        next.push(v);
                        next.sort_unstable();
                        neighbours.push(next);
                    }
                }
                for next in neighbours {
                    let s = score(&next);
                    if s.0 == 0 {
                        continue;
                    }
                    let improves = here.0 == 0 || better(s, here);
                    if improves && best_move.as_ref().map_or(true, |(_, bs)| better(s, *bs)) {
                        best_move = Some((next, s));
                    }
                }
                match best_move {
                    Some((next, _)) => cur = next,
                    None => break,
                }
            }
        }
        if cur.is_empty() || score(&cur).0 == 0 {
            continue;
        }
        if best_set.as_ref().map_or(true, |b| better(score(&cur), score(b))) {
            best_set = Some(cur);
        }
    }
    let Some(set) = best_set else { return Ok(None) };
    let mut tour = tour_for(&set);
    if let Some(r) = &kro_res {
        if r.tour.points(metric) == set && r.tour.length() < tour.length() {
            tour = r.tour.clone();
        }
    }
    let covered = coverage(&tour.points(metric));

    let bound = hk.as_ref().map(|h| {
        let mut b: f64 = 0.0;
        for mask in 1..(1usize << cand_pts.len()) {
            let set: Vec<usize> = (0..cand_pts.len()).filter(|&j| mask & (1 << j) != 0).map(|j| cand_pts[j]).collect();
            let cov = coverage_count(&set) as f64;
            let len = h.cost(mask);
            b = b.max(if len > 0.0 { cov / len } else if cov > 0.0 { f64::INFINITY } else { 0.0 });
        }
        b
    });
    let cost = tour.length();
    Ok(Some(PickedSet { kind: PickKind::FirstStage, tour, covered, cost, bound }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetCoverOutcome {
    pub fixed: FixedTour,
    pub actions: Vec<RecourseAction>,
    pub total_cost: Rational,
    pub picks: Vec<PickedSet>,
    pub ground_size: usize,
    /// Largest ratio between the best achievable and the picked ratio over
    /// all iterations; `None` when some bound was not certified.
    pub rho_sub: Option<f64>,
}

impl SetCoverOutcome {
    /// `(1 + ln |U|) * rho_sub`.
    pub fn guarantee(&self) -> Option<f64> {
        self.rho_sub.map(|r| (1.0 + (self.ground_size.max(1) as f64).ln()) * r)
    }

    pub fn pick_log_csv(&self) -> String {
        let mut s = String::from("iteration,kind,scenario,ratio,cost,covered,bound\n");
        for (k, p) in self.picks.iter().enumerate() {
            let (kind, scn) = match p.kind {
                PickKind::FirstStage => ("first", String::new()),
                PickKind::SecondStage(i) => ("second", i.to_string()),
            };
            let bound = p.bound.map(|b| b.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{k},{kind},{scn},{},{},{},{bound}",
                p.ratio(),
                rational::format(&p.cost),
                p.covered.len()
            );
        }
        s
    }
}

/// Greedy set cover: repeatedly take the better of the best first- and
/// second-stage sets (first stage on ties) until every demand is covered.
pub fn greedy_set_cover(inst: &StochVrpInstance, cfg: &SetCoverConfig) -> Result<SetCoverOutcome> {
    let set = inst
        .scenarios()
        .ok_or_else(|| Error::InvalidInstance("set cover needs explicit scenarios".into()))?;
    let elements = build_ground_set(set);
    let mut uncovered = vec![true; elements.len()];
    let mut left = elements.len();
    let mut picks = Vec::new();
    let mut rho: Option<f64> = Some(1.0);
    let mut iteration = 0u64;
    while left > 0 {
        let mut kcfg = cfg.clone();
        kcfg.kro.seed = crate::seed::derive(cfg.kro.seed, iteration);
        iteration += 1;
        let second = second_stage_best_ratio(inst, &elements, &uncovered, &kcfg)
            .ok_or_else(|| Error::Invariant("no second-stage set covers a remaining demand".into()))?;
        let first = first_stage_best_ratio(inst, &elements, &uncovered, &kcfg)?;
        let best_bound = match (first.as_ref().map(|f| f.bound), second.bound) {
            (Some(Some(a)), Some(b)) => Some(a.max(b)),
            (None, b) => b,
            _ => None,
        };
        let pick = match first {
            Some(f) if f.beats(&second) != std::cmp::Ordering::Less => f,
            _ => second,
        };
        rho = match (rho, best_bound) {
            (Some(r), Some(b)) => {
                let got = pick.ratio();
                let this = if b.is_infinite() && got.is_infinite() { 1.0 } else { (b / got).max(1.0) };
                Some(r.max(this))
            }
            _ => None,
        };
        for &e in &pick.covered {
            debug_assert!(uncovered[e]);
            uncovered[e] = false;
        }
        left -= pick.covered.len();
        if pick.covered.is_empty() {
            return Err(Error::Invariant("greedy pick covered nothing".into()));
        }
        picks.push(pick);
    }

    let metric = &inst.metric;
    let mut fixed = FixedTour::empty();
    let first_ids: Vec<usize> = (0..picks.len()).filter(|&k| picks[k].kind == PickKind::FirstStage).collect();
    let mut actions: Vec<RecourseAction> = (0..set.len()).map(|_| RecourseAction::idle(first_ids.len())).collect();
    for (j, &k) in first_ids.iter().enumerate() {
        fixed.push(picks[k].tour.clone());
        for &e in &picks[k].covered {
            let el = elements[e];
            actions[el.scenario].served[j].push((el.point, el.demand));
        }
    }
    for p in &picks {
        if let PickKind::SecondStage(i) = p.kind {
            let served = p.covered.iter().map(|&e| (elements[e].point, elements[e].demand)).collect();
            actions[i].recourse.push(ServedTour { tour: p.tour.clone(), served });
        }
    }
    let total_cost = picks.iter().fold(Rational::zero(), |a, p| a + p.cost);
    let _ = metric;
    Ok(SetCoverOutcome { fixed, actions, total_cost, picks, ground_size: elements.len(), rho_sub: rho })
}
