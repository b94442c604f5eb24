//! Small dense LP solver with a cutting-plane driver.
//!
//! Two-phase primal simplex on a dense tableau. Pricing is Dantzig's rule
//! until the objective stalls, then Bland's rule for the remainder of the
//! phase; both are deterministic.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the constraint (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    names: Vec<String>,
    lo: Vec<f64>,
    hi: Vec<Option<f64>>,
    obj: Vec<f64>,
    constant: f64,
    maximize: bool,
    constraints: Vec<Constraint>,
    pub max_rounds: usize,
    pub max_pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    /// Cutting-plane rounds performed (1 when no cut was ever added).
    pub rounds: usize,
    pub cuts_added: usize,
}

impl LpSolution {
    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }
}

/// Produces constraints violated by a candidate point; an empty result
/// certifies feasibility for the family the separator represents.
pub trait Separator {
    fn separate(&mut self, x: &[f64]) -> Vec<Constraint>;
}

impl<F: FnMut(&[f64]) -> Vec<Constraint>> Separator for F {
    fn separate(&mut self, x: &[f64]) -> Vec<Constraint> {
        self(x)
    }
}

impl LpModel {
    pub fn minimize() -> Self {
        Self::with_sense(false)
    }

    pub fn maximize() -> Self {
        Self::with_sense(true)
    }

    fn with_sense(maximize: bool) -> Self {
        Self {
            names: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            obj: Vec::new(),
            constant: 0.0,
            maximize,
            constraints: Vec::new(),
            max_rounds: 500,
            max_pivots: 200_000,
        }
    }

    /// Adds a variable with bounds `[lo, hi]` and objective coefficient `c`.
    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: Option<f64>, c: f64) -> usize {
        assert!(lo.is_finite(), "lower bounds must be finite");
        if let Some(h) = hi {
            assert!(lo <= h, "variable bounds out of order");
        }
        self.names.push(name.into());
        self.lo.push(lo);
        self.hi.push(hi);
        self.obj.push(c);
        self.names.len() - 1
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        assert!(c.coeffs.iter().all(|&(j, _)| j < self.names.len()), "constraint references an unknown variable");
        self.constraints.push(c);
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.add_constraint(Constraint::new(coeffs, sense, rhs));
    }

    pub fn add_objective(&mut self, j: usize, c: f64) {
        self.obj[j] += c;
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn bounds(&self, j: usize) -> (f64, Option<f64>) {
        (self.lo[j], self.hi[j])
    }

    pub fn is_maximize(&self) -> bool {
        self.maximize
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.constant + self.obj.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Human-readable dump, one constraint per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let term = |s: &mut String, c: f64, j: usize| {
            let _ = write!(s, " {:+} {}", c, self.names[j]);
        };
        s.push_str(if self.maximize { "max" } else { "min" });
        for (j, &c) in self.obj.iter().enumerate() {
            if c != 0.0 {
                term(&mut s, c, j);
            }
        }
        if self.constant != 0.0 {
            let _ = write!(s, " {:+}", self.constant);
        }
        s.push('\n');
        for (k, c) in self.constraints.iter().enumerate() {
            let _ = write!(s, "c{k}:");
            for &(j, a) in &c.coeffs {
                term(&mut s, a, j);
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(s, " {op} {}", c.rhs);
        }
        for j in 0..self.names.len() {
            match self.hi[j] {
                Some(h) => {
                    let _ = writeln!(s, "{} <= {} <= {}", self.lo[j], self.names[j], h);
                }
                None => {
                    let _ = writeln!(s, "{} <= {}", self.lo[j], self.names[j]);
                }
            }
        }
        s
    }

    /// Solves the materialized model.
    pub fn solve(&self) -> Result<LpSolution> {
        let (values, pivots) = simplex(self)?;
        let _ = pivots;
        let objective = self.objective_value(&values);
        Ok(LpSolution { values, objective, rounds: 1, cuts_added: 0 })
    }

    /// Cutting-plane loop: solve, ask every separator for violated cuts in
    /// order, add them, repeat until no separator reports a cut.
    pub fn solve_with_cuts(&mut self, separators: &mut [&mut dyn Separator]) -> Result<LpSolution> {
        let mut cuts_added = 0;
        for round in 1..=self.max_rounds {
            let (values, _) = simplex(self)?;
            let mut cuts = Vec::new();
            for sep in separators.iter_mut() {
                cuts.extend(
                    sep.separate(&values)
                        .into_iter()
                        .filter(|c| c.violation(&values) > EPS),
                );
            }
            if cuts.is_empty() {
                let objective = self.objective_value(&values);
                return Ok(LpSolution { values, objective, rounds: round, cuts_added });
            }
            cuts_added += cuts.len();
            for c in cuts {
                self.add_constraint(c);
            }
        }
        Err(Error::IterationLimit(self.max_rounds))
    }
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let w = self.cols + 1;
        let p = self.a[r][c];
        for k in 0..w {
            self.a[r][k] /= p;
        }
        self.a[r][c] = 1.0;
        let prow = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f.abs() > 0.0 {
                for k in 0..w {
                    row[k] -= f * prow[k];
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f.abs() > 0.0 {
            for k in 0..w {
                obj[k] -= f * prow[k];
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Minimizes the reduced-cost row `obj` (entry `cols` holds minus the
    /// current objective). Columns with `allowed[c] == false` never enter.
    fn run(&mut self, obj: &mut [f64], allowed: &[bool], budget: &mut usize) -> Result<()> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last = f64::INFINITY;
        loop {
            let entering = if bland {
                (0..self.cols).find(|&c| allowed[c] && obj[c] < -EPS)
            } else {
                let mut best: Option<usize> = None;
                for c in 0..self.cols {
                    if allowed[c] && obj[c] < -EPS && best.map_or(true, |b| obj[c] < obj[b]) {
                        best = Some(c);
                    }
                }
                best
            };
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.a.len() {
                let coef = self.a[r][c];
                if coef > EPS {
                    let ratio = self.a[r][self.cols] / coef;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - EPS
                                || (ratio <= best_ratio + EPS && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some(r);
                        best_ratio = ratio;
                    }
                }
            }
            let Some(r) = leave else { return Err(Error::Unbounded) };
            if *budget == 0 {
                return Err(Error::IterationLimit(0));
            }
            *budget -= 1;
            self.pivot(r, c, obj);
            let current = -obj[self.cols];
            if current < last - EPS {
                last = current;
                stall = 0;
            } else {
                stall += 1;
                if stall > 50 {
                    bland = true;
                }
            }
        }
    }
}

/// Returns an optimal point in the original variable space.
fn simplex(model: &LpModel) -> Result<(Vec<f64>, usize)> {
    let nv = model.names.len();
    // Shift to x' = x - lo >= 0, and turn finite upper bounds into rows.
    let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    for c in &model.constraints {
        let shift: f64 = c.coeffs.iter().map(|&(j, a)| a * model.lo[j]).sum();
        rows.push((c.coeffs.clone(), c.sense, c.rhs - shift));
    }
    for j in 0..nv {
        if let Some(h) = model.hi[j] {
            rows.push((vec![(j, 1.0)], Sense::Le, h - model.lo[j]));
        }
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            for t in &mut row.0 {
                t.1 = -t.1;
            }
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            row.2 = -row.2;
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = nv + n_slack + n_art;
    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut s_idx = nv;
    let mut a_idx = nv + n_slack;
    let mut artificial = vec![false; cols];
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        for &(j, v) in coeffs {
            a[i][j] += v;
        }
        a[i][cols] = *rhs;
        match sense {
            Sense::Le => {
                a[i][s_idx] = 1.0;
                basis[i] = s_idx;
                s_idx += 1;
            }
            Sense::Ge => {
                a[i][s_idx] = -1.0;
                s_idx += 1;
                a[i][a_idx] = 1.0;
                artificial[a_idx] = true;
                basis[i] = a_idx;
                a_idx += 1;
            }
            Sense::Eq => {
                a[i][a_idx] = 1.0;
                artificial[a_idx] = true;
                basis[i] = a_idx;
                a_idx += 1;
            }
        }
    }
    let mut t = Tableau { a, basis, cols };
    let mut budget = model.max_pivots;

    if n_art > 0 {
        let mut obj = vec![0.0; cols + 1];
        for c in 0..cols {
            if artificial[c] {
                obj[c] = 1.0;
            }
        }
        for i in 0..m {
            if artificial[t.basis[i]] {
                for k in 0..=cols {
                    obj[k] -= t.a[i][k];
                }
            }
        }
        let allowed = vec![true; cols];
        t.run(&mut obj, &allowed, &mut budget).map_err(|e| match e {
            Error::IterationLimit(_) => Error::IterationLimit(model.max_pivots),
            other => other,
        })?;
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if -obj[cols] > 1e-7 * scale {
            return Err(Error::Infeasible);
        }
        // Drive remaining artificials out of the basis.
        let mut i = 0;
        while i < t.a.len() {
            if artificial[t.basis[i]] {
                let c = (0..cols).find(|&c| !artificial[c] && t.a[i][c].abs() > 1e-7);
                match c {
                    Some(c) => {
                        let mut dummy = vec![0.0; cols + 1];
                        t.pivot(i, c, &mut dummy);
                        i += 1;
                    }
                    None => {
                        t.a.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let sign = if model.maximize { -1.0 } else { 1.0 };
    let mut obj = vec![0.0; cols + 1];
    for j in 0..nv {
        obj[j] = sign * model.obj[j];
    }
    for i in 0..t.a.len() {
        let b = t.basis[i];
        let f = obj[b];
        if f != 0.0 {
            for k in 0..=cols {
                obj[k] -= f * t.a[i][k];
            }
        }
    }
    let allowed: Vec<bool> = artificial.iter().map(|&x| !x).collect();
    t.run(&mut obj, &allowed, &mut budget).map_err(|e| match e {
        Error::IterationLimit(_) => Error::IterationLimit(model.max_pivots),
        other => other,
    })?;

    let mut x = model.lo.clone();
    for (i, &b) in t.basis.iter().enumerate() {
        if b < nv {
            x[b] += t.a[i][cols];
        }
    }
    for j in 0..nv {
        if x[j] < model.lo[j] {
            x[j] = model.lo[j];
        }
        if let Some(h) = model.hi[j] {
            if x[j] > h {
                x[j] = h;
            }
        }
    }
    Ok((x, model.max_pivots - budget))
}

/// Index of the edges of the complete graph on `n` points, `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeIndex {
    n: usize,
    edges: Vec<(usize, usize)>,
    id: Vec<Vec<usize>>,
}

impl EdgeIndex {
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        let mut id = vec![vec![usize::MAX; n]; n];
        for u in 0..n {
            for v in u + 1..n {
                id[u][v] = edges.len();
                id[v][u] = edges.len();
                edges.push((u, v));
            }
        }
        Self { n, edges, id }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn id(&self, u: usize, v: usize) -> usize {
        self.id[u][v]
    }

    /// Edge ids crossing the cut `(side, complement)`.
    pub fn delta(&self, side: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        for &v in side {
            inside[v] = true;
        }
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| inside[u] != inside[v])
            .map(|(e, _)| e)
            .collect()
    }

    /// Dense symmetric capacity matrix from per-edge values.
    pub fn to_matrix(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let mut c = vec![vec![0.0; self.n]; self.n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            c[u][v] = z[e];
            c[v][u] = z[e];
        }
        c
    }
}

/// A violated connectivity cut: every edge leaving `side` must carry at
/// least `requirement` in total.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub terminal: usize,
    pub side: Vec<usize>,
    pub capacity: f64,
    pub requirement: f64,
}

/// Max-flow value from `s` to `t` and the source side of a minimum cut
/// (the points reachable from `s` in the final residual graph).
pub fn min_cut(cap: &[Vec<f64>], s: usize, t: usize) -> (f64, Vec<usize>) {
    let n = cap.len();
    let mut res: Vec<Vec<f64>> = cap.to_vec();
    let mut flow = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if prev[v] == usize::MAX && res[u][v] > EPS {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            let mut side: Vec<usize> = (0..n).filter(|&v| prev[v] != usize::MAX).collect();
            side.sort_unstable();
            return (flow, side);
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = prev[v];
            bottleneck = bottleneck.min(res[u][v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            res[u][v] -= bottleneck;
            res[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
}

/// For each terminal `v` with requirement `rho_v`, reports the minimum
/// `v`-`root` cut when its capacity under `cap` falls short of `rho_v`.
pub fn separate_cuts(cap: &[Vec<f64>], root: usize, requirements: &[(usize, f64)]) -> Vec<Cut> {
    let mut cuts: Vec<Cut> = Vec::new();
    for &(v, rho) in requirements {
        if v == root || rho <= EPS {
            continue;
        }
        let (value, side) = min_cut(cap, v, root);
        if value < rho - EPS && !cuts.iter().any(|c| c.side == side && c.requirement >= rho) {
            cuts.push(Cut { terminal: v, side, capacity: value, requirement: rho });
        }
    }
    cuts
}
