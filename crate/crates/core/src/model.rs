//! Problem model: metric, demands, tours, recourse actions and the exact
//! two-stage objective.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Finite metric with a distinguished depot.
///
/// Points are addressed by index; names are kept for I/O. Distances are exact
/// rationals, with an `f64` shadow copy for the numerical subroutines.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    names: Vec<String>,
    root: usize,
    dist: Vec<Vec<Rational>>,
    distf: Vec<Vec<f64>>,
}

impl Metric {
    /// Builds a metric, checking symmetry, zero diagonal, non-negativity and
    /// the triangle inequality.
    pub fn new(names: Vec<String>, root: usize, dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidMetric("no points".into()));
        }
        if root >= n {
            return Err(Error::InvalidMetric(format!("root index {root} out of range")));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric(format!("distance matrix is not {n}x{n}")));
        }
        for u in 0..n {
            if !dist[u][u].is_zero() {
                return Err(Error::InvalidMetric(format!("d({0},{0}) != 0", names[u])));
            }
            for v in 0..n {
                if dist[u][v] < Rational::zero() {
                    return Err(Error::InvalidMetric(format!(
                        "negative distance d({},{})",
                        names[u], names[v]
                    )));
                }
                if dist[u][v] != dist[v][u] {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric distance between {} and {}",
                        names[u], names[v]
                    )));
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    if dist[u][w] > dist[u][v] + dist[v][w] {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({}, {}, {})",
                            names[u], names[v], names[w]
                        )));
                    }
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &names {
            if !seen.insert(name) {
                return Err(Error::InvalidMetric(format!("duplicate point name {name}")));
            }
        }
        let distf = dist
            .iter()
            .map(|row| row.iter().map(rational::to_f64).collect())
            .collect();
        Ok(Self { names, root, dist, distf })
    }

    /// Shortest-path closure of a symmetric non-negative matrix, then [`Metric::new`].
    pub fn from_closure(names: Vec<String>, root: usize, mut dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = dist.len();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        Self::new(names, root, dist)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> Rational {
        self.dist[u][v]
    }

    #[inline]
    pub fn df(&self, u: usize, v: usize) -> f64 {
        self.distf[u][v]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    /// All points other than the root, ascending.
    pub fn customers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| v != self.root)
    }

    pub fn diameter(&self) -> Rational {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .copied()
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn min_positive_distance(&self) -> Option<Rational> {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .copied()
            .filter(|d| *d > Rational::zero())
            .min()
    }

    /// Same points with every distance multiplied by `s > 0`.
    pub fn scaled(&self, s: Rational) -> Result<Self> {
        if s <= Rational::zero() {
            return Err(Error::InvalidMetric("scale factor must be positive".into()));
        }
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|d| d * s).collect())
            .collect();
        Self::new(self.names.clone(), self.root, dist)
    }

    /// Sub-metric on `points` (which must contain the root), re-indexed in the
    /// given order.
    pub fn restrict(&self, points: &[usize]) -> Result<Self> {
        let root = points
            .iter()
            .position(|&p| p == self.root)
            .ok_or_else(|| Error::InvalidMetric("restriction must keep the root".into()))?;
        let names = points.iter().map(|&p| self.names[p].clone()).collect();
        let dist = points
            .iter()
            .map(|&u| points.iter().map(|&v| self.dist[u][v]).collect())
            .collect();
        Self::new(names, root, dist)
    }

    pub fn path_length(&self, seq: &[usize]) -> Rational {
        seq.windows(2).map(|w| self.dist[w[0]][w[1]]).fold(Rational::zero(), |a, b| a + b)
    }

    pub fn path_length_f(&self, seq: &[usize]) -> f64 {
        seq.windows(2).map(|w| self.distf[w[0]][w[1]]).sum()
    }
}

/// Dense demand vector `q_v` over the points of a metric.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandVector(Vec<u32>);

impl DemandVector {
    pub fn new(q: Vec<u32>) -> Self {
        Self(q)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn get(&self, v: usize) -> u32 {
        self.0[v]
    }

    pub fn set(&mut self, v: usize, q: u32) {
        self.0[v] = q;
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Points with positive demand, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&v| self.0[v] > 0).collect()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&q| q as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    pub fn validate(&self, metric: &Metric, capacity: u32) -> Result<()> {
        if self.0.len() != metric.len() {
            return Err(Error::InvalidDemand(format!(
                "length {} does not match {} points",
                self.0.len(),
                metric.len()
            )));
        }
        if self.0[metric.root()] != 0 {
            return Err(Error::InvalidDemand("the depot carries demand".into()));
        }
        for (v, &q) in self.0.iter().enumerate() {
            if q > capacity {
                return Err(Error::DemandExceedsCapacity { point: v, demand: q, capacity });
            }
        }
        Ok(())
    }
}

/// Explicit demand distribution: `m` equiprobable scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<DemandVector>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<DemandVector>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::InvalidInstance("a scenario set needs at least one scenario".into()));
        }
        let n = scenarios[0].len();
        if scenarios.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidInstance("scenarios disagree on the point universe".into()));
        }
        Ok(Self { scenarios })
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn scenarios(&self) -> &[DemandVector] {
        &self.scenarios
    }

    pub fn get(&self, i: usize) -> &DemandVector {
        &self.scenarios[i]
    }
}

/// A closed walk from the depot back to the depot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RTour {
    seq: Vec<usize>,
    length: Rational,
}

impl RTour {
    pub fn new(metric: &Metric, seq: Vec<usize>) -> Result<Self> {
        let r = metric.root();
        if seq.first() != Some(&r) || seq.last() != Some(&r) {
            return Err(Error::InvalidInstance("an r-tour must start and end at the depot".into()));
        }
        if let Some(&bad) = seq.iter().find(|&&v| v >= metric.len()) {
            return Err(Error::InvalidInstance(format!("tour visits unknown point {bad}")));
        }
        let length = metric.path_length(&seq);
        Ok(Self { seq, length })
    }

    /// The trivial tour `(r)`.
    pub fn depot(metric: &Metric) -> Self {
        Self { seq: vec![metric.root()], length: Rational::zero() }
    }

    /// Tour `r -> points... -> r`, dropping depot repeats inside.
    pub fn through(metric: &Metric, points: &[usize]) -> Self {
        let r = metric.root();
        let mut seq = vec![r];
        seq.extend(points.iter().copied().filter(|&p| p != r));
        if seq.len() > 1 {
            seq.push(r);
        }
        let length = metric.path_length(&seq);
        Self { seq, length }
    }

    pub fn seq(&self) -> &[usize] {
        &self.seq
    }

    pub fn length(&self) -> Rational {
        self.length
    }

    pub fn length_ref(&self) -> &Rational {
        &self.length
    }

    pub fn visits(&self, v: usize) -> bool {
        self.seq.contains(&v)
    }

    /// Distinct visited points other than the depot, ascending.
    pub fn points(&self, metric: &Metric) -> Vec<usize> {
        let mut pts: Vec<usize> = self.seq.iter().copied().filter(|&v| v != metric.root()).collect();
        pts.sort_unstable();
        pts.dedup();
        pts
    }

    pub fn is_trivial(&self) -> bool {
        self.seq.len() <= 1 || self.length.is_zero() && self.seq.iter().all(|&v| v == self.seq[0])
    }
}

/// Length of a tour, recomputed from the metric.
pub fn tour_length(metric: &Metric, tour: &RTour) -> Rational {
    metric.path_length(tour.seq())
}

/// First-stage decision: a collection of r-tours.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixedTour {
    rtours: Vec<RTour>,
}

impl FixedTour {
    pub fn new(rtours: Vec<RTour>) -> Self {
        Self { rtours }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rtours(&self) -> &[RTour] {
        &self.rtours
    }

    pub fn len(&self) -> usize {
        self.rtours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rtours.is_empty()
    }

    pub fn total_length(&self) -> Rational {
        rational::sum(self.rtours.iter().map(|t| &t.length))
    }

    /// `k` consecutive copies of every r-tour: copy `l` of tour `j` sits at
    /// index `j * k + l`.
    pub fn replicate(&self, k: usize) -> Self {
        let rtours = self
            .rtours
            .iter()
            .flat_map(|t| std::iter::repeat(t.clone()).take(k))
            .collect();
        Self { rtours }
    }

    pub fn push(&mut self, t: RTour) {
        self.rtours.push(t);
    }
}

/// A recourse tour together with the demands it serves.
#[derive(Debug, Clone, PartialEq)]
pub struct ServedTour {
    pub tour: RTour,
    pub served: Vec<(usize, u32)>,
}

/// Second-stage decision for one scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecourseAction {
    /// `served[j]`: demands satisfied by r-tour `j` of the fixed tour.
    pub served: Vec<Vec<(usize, u32)>>,
    pub recourse: Vec<ServedTour>,
}

impl RecourseAction {
    pub fn idle(fixed_len: usize) -> Self {
        Self { served: vec![Vec::new(); fixed_len], recourse: Vec::new() }
    }

    pub fn recourse_length(&self) -> Rational {
        rational::sum(self.recourse.iter().map(|t| &t.tour.length))
    }

    /// Checks every feasibility invariant of this action against one scenario.
    pub fn validate(
        &self,
        metric: &Metric,
        fixed: &FixedTour,
        capacity: u32,
        scenario_idx: usize,
        scenario: &DemandVector,
    ) -> Result<()> {
        if self.served.len() > fixed.len() {
            return Err(Error::InvalidInstance(format!(
                "scenario {scenario_idx}: action references {} r-tours, fixed tour has {}",
                self.served.len(),
                fixed.len()
            )));
        }
        let mut served_count = vec![0u32; metric.len()];
        let mut check = |v: usize, q: u32| -> Result<()> {
            if v >= metric.len() || scenario.get(v) != q || q == 0 {
                return Err(Error::InvalidService { scenario: scenario_idx, point: v });
            }
            served_count[v] += 1;
            Ok(())
        };
        for (j, set) in self.served.iter().enumerate() {
            let load: u64 = set.iter().map(|&(_, q)| q as u64).sum();
            if load > capacity as u64 {
                return Err(Error::CapacityViolation {
                    what: format!("scenario {scenario_idx}, fixed r-tour {j}"),
                    load,
                    capacity,
                });
            }
            for &(v, q) in set {
                if !fixed.rtours()[j].visits(v) {
                    return Err(Error::PointNotOnTour {
                        scenario: scenario_idx,
                        point: v,
                        what: format!("fixed r-tour {j}"),
                    });
                }
                check(v, q)?;
            }
        }
        for (k, st) in self.recourse.iter().enumerate() {
            let load: u64 = st.served.iter().map(|&(_, q)| q as u64).sum();
            if load > capacity as u64 {
                return Err(Error::CapacityViolation {
                    what: format!("scenario {scenario_idx}, recourse tour {k}"),
                    load,
                    capacity,
                });
            }
            if st.tour.length != tour_length(metric, &st.tour) {
                return Err(Error::Invariant("stale recourse tour length".into()));
            }
            for &(v, q) in &st.served {
                if !st.tour.visits(v) {
                    return Err(Error::PointNotOnTour {
                        scenario: scenario_idx,
                        point: v,
                        what: format!("recourse tour {k}"),
                    });
                }
                check(v, q)?;
            }
        }
        for v in 0..metric.len() {
            match (scenario.get(v) > 0, served_count[v]) {
                (true, 0) => return Err(Error::UnservedDemand { scenario: scenario_idx, point: v }),
                (true, 1) | (false, 0) => {}
                _ => return Err(Error::InvalidService { scenario: scenario_idx, point: v }),
            }
        }
        Ok(())
    }
}

/// How demands are specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Demands {
    Scenarios(ScenarioSet),
    Independent(crate::indep::IndepDistribution),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochVrpInstance {
    pub metric: Metric,
    pub capacity: u32,
    pub lambda: Rational,
    pub demands: Demands,
}

impl StochVrpInstance {
    pub fn new(metric: Metric, capacity: u32, lambda: Rational, demands: Demands) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidInstance("capacity must be at least 1".into()));
        }
        if lambda < Rational::from_integer(1) {
            return Err(Error::InvalidInstance("inflation factor must be at least 1".into()));
        }
        match &demands {
            Demands::Scenarios(set) => {
                for s in set.scenarios() {
                    s.validate(&metric, capacity)?;
                }
            }
            Demands::Independent(dist) => dist.validate(&metric, capacity)?,
        }
        Ok(Self { metric, capacity, lambda, demands })
    }

    pub fn scenarios(&self) -> Option<&ScenarioSet> {
        match &self.demands {
            Demands::Scenarios(s) => Some(s),
            Demands::Independent(_) => None,
        }
    }
}

/// `d(tau) + lambda * (1/m) * sum_i d(sigma_i)` after checking feasibility of
/// every action.
pub fn evaluate_objective(
    inst: &StochVrpInstance,
    tour: &FixedTour,
    actions: &[RecourseAction],
) -> Result<Rational> {
    let set = inst
        .scenarios()
        .ok_or_else(|| Error::InvalidInstance("objective evaluation needs explicit scenarios".into()))?;
    if actions.len() != set.len() {
        return Err(Error::InvalidInstance(format!(
            "{} actions for {} scenarios",
            actions.len(),
            set.len()
        )));
    }
    let mut recourse = Rational::zero();
    for (i, (action, scenario)) in actions.iter().zip(set.scenarios()).enumerate() {
        action.validate(&inst.metric, tour, inst.capacity, i, scenario)?;
        recourse += action.recourse_length();
    }
    let m = Rational::from_integer(set.len() as i128);
    Ok(tour.total_length() + inst.lambda * recourse / m)
}
