//! Outlier VRP: which realized demands ride the fixed tour, and a
//! bicriteria rounding that serves them on five copies of it.

use num_traits::Zero;

use crate::detvrp;
use crate::error::{Error, Result};
use crate::lp::{separate_cuts, Constraint, EdgeIndex, LpModel, Sense, EPS};
use crate::model::{DemandVector, FixedTour, Metric, RecourseAction, ServedTour, StochVrpInstance};
use crate::rational::{self, Rational};

/// Copies of the fixed tour used by the rounding.
pub const COPIES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierLpSolution {
    /// `x[v]`, zero off the demand support.
    pub x: Vec<f64>,
    /// `y[v]` as `(j, value)` pairs over r-tours visiting `v`.
    pub y: Vec<Vec<(usize, f64)>>,
    pub edges: EdgeIndex,
    pub z: Vec<f64>,
    pub value: f64,
    pub rounds: usize,
    pub cuts_added: usize,
}

impl OutlierLpSolution {
    /// `d . z`
    pub fn tree_cost(&self, metric: &Metric) -> f64 {
        self.edges.edges().iter().zip(&self.z).map(|(&(u, v), z)| metric.df(u, v) * z).sum()
    }
}

/// LP relaxation of outlier VRP over the demand support; connectivity cuts
/// `z(delta(U)) + x_v >= 1` are separated lazily by min cut.
pub fn solve_outlier_lp(metric: &Metric, fixed: &FixedTour, q: &DemandVector, capacity: u32) -> Result<OutlierLpSolution> {
    q.validate(metric, capacity)?;
    let n = metric.len();
    let r = metric.root();
    let support = q.support();
    let qf = capacity as f64;
    let mut lp = LpModel::minimize();
    let mut x_var = vec![usize::MAX; n];
    let mut y_var: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &v in &support {
        let flow = metric.df(r, v) * q.get(v) as f64 / qf;
        lp.add_constant(flow);
        x_var[v] = lp.add_var(format!("x{v}"), 0.0, Some(1.0), -flow);
        for (j, t) in fixed.rtours().iter().enumerate() {
            if t.visits(v) {
                y_var[v].push((j, lp.add_var(format!("y{v}_{j}"), 0.0, Some(1.0), 0.0)));
            }
        }
        let mut assign = vec![(x_var[v], 1.0)];
        assign.extend(y_var[v].iter().map(|&(_, id)| (id, -1.0)));
        lp.constrain(assign, Sense::Eq, 0.0);
    }
    for j in 0..fixed.len() {
        let row: Vec<(usize, f64)> = support
            .iter()
            .flat_map(|&v| y_var[v].iter().filter(|&&(jj, _)| jj == j).map(move |&(_, id)| (id, q.get(v) as f64)))
            .collect();
        if !row.is_empty() {
            lp.constrain(row, Sense::Le, qf);
        }
    }
    let edges = EdgeIndex::complete(n);
    let z0 = lp.num_vars();
    for (e, &(u, v)) in edges.edges().iter().enumerate() {
        let id = lp.add_var(format!("z{u}_{v}"), 0.0, None, metric.df(u, v));
        debug_assert_eq!(id, z0 + e);
    }
    for &v in &support {
        let mut row: Vec<(usize, f64)> = edges.delta(&[v]).into_iter().map(|e| (z0 + e, 1.0)).collect();
        row.push((x_var[v], 1.0));
        lp.constrain(row, Sense::Ge, 1.0);
    }

    let mut sep = |vals: &[f64]| -> Vec<Constraint> {
        let cap = edges.to_matrix(&vals[z0..z0 + edges.len()]);
        let reqs: Vec<(usize, f64)> = support.iter().map(|&v| (v, 1.0 - vals[x_var[v]])).collect();
        separate_cuts(&cap, r, &reqs)
            .into_iter()
            .map(|c| {
                let mut row: Vec<(usize, f64)> = edges.delta(&c.side).into_iter().map(|e| (z0 + e, 1.0)).collect();
                row.push((x_var[c.terminal], 1.0));
                Constraint::new(row, Sense::Ge, 1.0)
            })
            .collect()
    };
    let sol = lp.solve_with_cuts(&mut [&mut sep])?;
    let mut x = vec![0.0; n];
    let mut y = vec![Vec::new(); n];
    for &v in &support {
        x[v] = sol.values[x_var[v]].clamp(0.0, 1.0);
        y[v] = y_var[v].iter().map(|&(j, id)| (j, sol.values[id].max(0.0))).collect();
    }
    Ok(OutlierLpSolution {
        x,
        y,
        z: sol.values[z0..z0 + edges.len()].iter().map(|v| v.max(0.0)).collect(),
        edges,
        value: sol.objective,
        rounds: sol.rounds,
        cuts_added: sol.cuts_added,
    })
}

/// Iterative rounding for restricted assignment: job `k` of size
/// `sizes[k]` may go to any machine in `allowed[k]`; the fractional
/// relaxation must fit within `budget` per machine. The result puts at
/// most `budget + max size` on every machine.
pub fn restricted_assignment(sizes: &[u32], allowed: &[Vec<usize>], machines: usize, budget: f64) -> Result<Vec<usize>> {
    let jobs = sizes.len();
    let mut assigned: Vec<Option<usize>> = vec![None; jobs];
    let mut fixed_load = vec![0.0; machines];
    let mut active = vec![true; machines];
    // Candidate pairs still in play.
    let mut pairs: Vec<Vec<usize>> = allowed.to_vec();
    for k in 0..jobs {
        if pairs[k].is_empty() {
            return Err(Error::AssignmentInfeasible(format!("job {k} has no admissible machine")));
        }
    }
    let mut rounds = 0usize;
    while assigned.iter().any(Option::is_none) {
        rounds += 1;
        if rounds > 4 * (jobs + machines) + 4 {
            return Err(Error::Invariant("restricted assignment rounding stalled".into()));
        }
        let mut lp = LpModel::minimize();
        let mut var: Vec<Vec<(usize, usize)>> = vec![Vec::new(); jobs];
        for k in 0..jobs {
            if assigned[k].is_some() {
                continue;
            }
            for &j in &pairs[k] {
                var[k].push((j, lp.add_var(format!("a{k}_{j}"), 0.0, Some(1.0), 0.0)));
            }
            lp.constrain(var[k].iter().map(|&(_, id)| (id, 1.0)).collect(), Sense::Eq, 1.0);
        }
        for j in 0..machines {
            if !active[j] {
                continue;
            }
            let row: Vec<(usize, f64)> = (0..jobs)
                .flat_map(|k| var[k].iter().filter(|&&(jj, _)| jj == j).map(move |&(_, id)| (id, sizes[k] as f64)))
                .collect();
            if !row.is_empty() {
                lp.constrain(row, Sense::Le, budget - fixed_load[j]);
            }
        }
        let sol = lp
            .solve()
            .map_err(|e| Error::AssignmentInfeasible(format!("assignment relaxation: {e}")))?;
        let mut progress = false;
        let mut frac_on: Vec<Vec<(usize, f64)>> = vec![Vec::new(); machines];
        for k in 0..jobs {
            if assigned[k].is_some() {
                continue;
            }
            let mut keep = Vec::new();
            for &(j, id) in &var[k] {
                let a = sol.values[id];
                if a >= 1.0 - 1e-7 {
                    assigned[k] = Some(j);
                    fixed_load[j] += sizes[k] as f64;
                    progress = true;
                    break;
                }
                if a > 1e-7 {
                    keep.push((j, a));
                }
            }
            if assigned[k].is_some() {
                continue;
            }
            if keep.len() < pairs[k].len() {
                progress = true;
            }
            pairs[k] = keep.iter().map(|&(j, _)| j).collect();
            if pairs[k].len() == 1 {
                let j = pairs[k][0];
                assigned[k] = Some(j);
                fixed_load[j] += sizes[k] as f64;
                progress = true;
                continue;
            }
            for &(j, a) in &keep {
                frac_on[j].push((k, a));
            }
        }
        for j in 0..machines {
            if !active[j] {
                continue;
            }
            let f = &frac_on[j];
            let drop = f.len() <= 1 || (f.len() == 2 && f[0].1 + f[1].1 >= 1.0 - 1e-7);
            if drop {
                active[j] = false;
                progress = true;
            }
        }
        if !progress {
            return Err(Error::Invariant("no extreme-point progress in assignment rounding".into()));
        }
    }
    Ok(assigned.into_iter().map(|a| a.unwrap_or(0)).collect())
}

/// First-fit decreasing into parts of load at most `capacity`.
pub fn greedy_parts(items: &[(usize, u32)], capacity: u32) -> Vec<Vec<(usize, u32)>> {
    let mut sorted = items.to_vec();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut parts: Vec<(u64, Vec<(usize, u32)>)> = Vec::new();
    for it in sorted {
        match parts.iter_mut().find(|(load, _)| load + it.1 as u64 <= capacity as u64) {
            Some((load, part)) => {
                *load += it.1 as u64;
                part.push(it);
            }
            None => parts.push((it.1 as u64, vec![it])),
        }
    }
    parts.into_iter().map(|(_, p)| p).collect()
}

/// Diagnostics of one rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct AugReport {
    pub lp_value: f64,
    /// Points served by the fixed tour.
    pub served_by_tour: Vec<usize>,
    /// Integral load per base r-tour after assignment rounding.
    pub loads: Vec<u64>,
    /// Number of parts per base r-tour.
    pub parts: Vec<usize>,
    pub residual_length: Rational,
    pub residual_mst: f64,
    pub tree_cost: f64,
    /// `residual_length / lp_value` when the LP value is positive.
    pub c1: Option<f64>,
}

/// Rounds an optimal outlier LP solution. The action refers to
/// `fixed.replicate(COPIES)`.
pub fn aug_round(
    metric: &Metric,
    fixed: &FixedTour,
    q: &DemandVector,
    capacity: u32,
    lp: &OutlierLpSolution,
) -> Result<(RecourseAction, AugReport)> {
    let support = q.support();
    let s: Vec<usize> = support.iter().copied().filter(|&v| lp.x[v] >= 0.5).collect();
    let f = fixed.len();
    let allowed: Vec<Vec<usize>> = s.iter().map(|&v| lp.y[v].iter().map(|&(j, _)| j).collect()).collect();
    let sizes: Vec<u32> = s.iter().map(|&v| q.get(v)).collect();
    let phi = restricted_assignment(&sizes, &allowed, f, 2.0 * capacity as f64)?;
    let mut loads = vec![0u64; f];
    let mut per_tour: Vec<Vec<(usize, u32)>> = vec![Vec::new(); f];
    for (k, &v) in s.iter().enumerate() {
        loads[phi[k]] += sizes[k] as u64;
        per_tour[phi[k]].push((v, sizes[k]));
    }
    let max_q = sizes.iter().copied().max().unwrap_or(0) as u64;
    for (j, &l) in loads.iter().enumerate() {
        if l > 2 * capacity as u64 + max_q {
            return Err(Error::Invariant(format!("r-tour {j} rounded load {l} exceeds 2Q + max q")));
        }
    }
    let mut action = RecourseAction::idle(f * COPIES);
    let mut parts = Vec::with_capacity(f);
    for (j, items) in per_tour.iter().enumerate() {
        let split = greedy_parts(items, capacity);
        if split.len() > COPIES {
            return Err(Error::Invariant(format!("r-tour {j} needs {} parts", split.len())));
        }
        parts.push(split.len());
        for (l, part) in split.into_iter().enumerate() {
            let mut part = part;
            part.sort_unstable();
            action.served[j * COPIES + l] = part;
        }
    }
    let mut residual = DemandVector::zeros(metric.len());
    let mut rest = Vec::new();
    for &v in &support {
        if lp.x[v] < 0.5 {
            residual.set(v, q.get(v));
            rest.push(v);
        }
    }
    let routes = detvrp::approx_vrp_routes(metric, &residual, capacity)?;
    let residual_length = detvrp::routes_length(&routes);
    for route in routes {
        let served = route.points.iter().map(|&v| (v, q.get(v))).collect();
        action.recourse.push(ServedTour { tour: route.tour, served });
    }
    let residual_mst = rational::to_f64(&detvrp::mst_length(metric, &rest));
    let c1 = (lp.value > EPS).then(|| rational::to_f64(&residual_length) / lp.value);
    let report = AugReport {
        lp_value: lp.value,
        served_by_tour: s,
        loads,
        parts,
        residual_length,
        residual_mst,
        tree_cost: lp.tree_cost(metric),
        c1,
    };
    Ok((action, report))
}

/// End-to-end recourse for one realized scenario: the action against
/// `fixed.replicate(COPIES)` and its cost `lambda * d(recourse)`.
pub fn recourse_for(inst: &StochVrpInstance, fixed: &FixedTour, q: &DemandVector) -> Result<(RecourseAction, Rational, AugReport)> {
    if q.is_zero() {
        let report = AugReport {
            lp_value: 0.0,
            served_by_tour: Vec::new(),
            loads: vec![0; fixed.len()],
            parts: vec![0; fixed.len()],
            residual_length: Rational::zero(),
            residual_mst: 0.0,
            tree_cost: 0.0,
            c1: None,
        };
        return Ok((RecourseAction::idle(fixed.len() * COPIES), Rational::zero(), report));
    }
    let lp = solve_outlier_lp(&inst.metric, fixed, q, inst.capacity)?;
    let (action, report) = aug_round(&inst.metric, fixed, q, inst.capacity, &lp)?;
    let cost = inst.lambda * action.recourse_length();
    Ok((action, cost, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{core_instance, tri_metric};
    use crate::model::RTour;
    use crate::rational::int;

    fn tour_a() -> FixedTour {
        let m = tri_metric();
        FixedTour::new(vec![RTour::through(&m, &[1])])
    }

    #[test]
    fn covered_demand_costs_nothing() {
        let m = tri_metric();
        let fixed = FixedTour::new(vec![RTour::through(&m, &[1, 2])]);
        let q = DemandVector::new(vec![0, 1, 1]);
        let lp = solve_outlier_lp(&m, &fixed, &q, 2).unwrap();
        assert!(lp.value.abs() < 1e-9);
        assert!(lp.x[1] > 1.0 - 1e-9 && lp.x[2] > 1.0 - 1e-9);
    }

    #[test]
    fn empty_tour_lp_below_mst_plus_flow() {
        let m = tri_metric();
        let q = DemandVector::new(vec![0, 1, 1]);
        let lp = solve_outlier_lp(&m, &FixedTour::empty(), &q, 1).unwrap();
        let lb = detvrp::lower_bounds(&m, &q, 1);
        assert!(lp.value <= rational::to_f64(&(lb.mst + lb.flow)) + 1e-9);
        assert!(lp.x.iter().all(|&x| x.abs() < 1e-9));
        // MST 2 + flow 3.
        assert!((lp.value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn full_load_on_tour() {
        let m = tri_metric();
        let q = DemandVector::new(vec![0, 3, 0]);
        let lp = solve_outlier_lp(&m, &tour_a(), &q, 3).unwrap();
        assert!(lp.value.abs() < 1e-9);
        assert!((lp.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn greedy_parts_example() {
        let items: Vec<(usize, u32)> = vec![(1, 7), (2, 7), (3, 7), (4, 7), (5, 2)];
        let parts = greedy_parts(&items, 10);
        assert_eq!(parts.len(), 4);
        assert!(parts.iter().all(|p| p.iter().map(|x| x.1).sum::<u32>() <= 10));
    }

    #[test]
    fn assignment_respects_bound() {
        let sizes = vec![3, 3, 3, 2, 2];
        let allowed = vec![vec![0, 1], vec![0, 1], vec![0, 1], vec![1], vec![0]];
        let phi = restricted_assignment(&sizes, &allowed, 2, 8.0).unwrap();
        let mut load = [0u32; 2];
        for (k, &j) in phi.iter().enumerate() {
            assert!(allowed[k].contains(&j));
            load[j] += sizes[k];
        }
        assert!(load.iter().all(|&l| l <= 8 + 3));
    }

    #[test]
    fn core_example_recourse() {
        let inst = core_instance(2);
        let q = DemandVector::new(vec![0, 0, 1]);
        let (action, cost, report) = recourse_for(&inst, &tour_a(), &q).unwrap();
        assert_eq!(cost, int(8));
        assert_eq!(action.recourse.len(), 1);
        assert_eq!(action.recourse[0].tour.seq(), &[0, 2, 0]);
        assert!((report.lp_value - 4.0).abs() < 1e-9);
        action.validate(&inst.metric, &tour_a().replicate(COPIES), 1, 0, &q).unwrap();
    }

    #[test]
    fn zero_scenario_is_idle() {
        let inst = core_instance(2);
        let (action, cost, _) = recourse_for(&inst, &tour_a(), &DemandVector::zeros(3)).unwrap();
        assert!(cost.is_zero());
        assert!(action.recourse.is_empty());
        assert_eq!(action.served.len(), COPIES);
    }

    #[test]
    fn on_tour_within_capacity_is_free() {
        let inst = core_instance(2);
        let q = DemandVector::new(vec![0, 1, 0]);
        let (action, cost, _) = recourse_for(&inst, &tour_a(), &q).unwrap();
        assert!(cost.is_zero());
        assert_eq!(action.served[0], vec![(1, 1)]);
    }
}
