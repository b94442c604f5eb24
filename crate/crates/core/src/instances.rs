//! Instance generators and the JSON file formats.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::indep::IndepDistribution;
use crate::model::{DemandVector, Demands, Metric, ScenarioSet, StochVrpInstance};
use crate::rational::{self, Rational};
use crate::seed;

fn violation(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::SchemaViolation { location: location.into(), message: message.into() }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| violation(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| violation(format!("{at}.{key}"), "missing field"))
}

fn as_object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| violation(at, "expected an object"))
}

fn as_array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| violation(at, "expected an array"))
}

fn as_rational(v: &Value, at: &str) -> Result<Rational> {
    match v {
        Value::String(s) => rational::parse(s).map_err(|_| violation(at, format!("not a decimal: {s:?}"))),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap_or(0) as i128)),
        _ => Err(violation(at, "expected a decimal string")),
    }
}

fn as_u32(v: &Value, at: &str) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| violation(at, "expected a non-negative integer"))
}

fn as_name(v: &Value, at: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(violation(at, "expected a point name")),
    }
}

fn point_index(metric_names: &[String], name: &str, at: &str) -> Result<usize> {
    metric_names
        .iter()
        .position(|p| p == name)
        .ok_or_else(|| violation(at, format!("unknown point {name:?}")))
}

/// Reads one scenario: an object `{point: demand}` or a list of such
/// objects.
fn parse_scenario(v: &Value, names: &[String], at: &str) -> Result<DemandVector> {
    let mut q = DemandVector::zeros(names.len());
    let mut put = |obj: &Map<String, Value>, at: &str| -> Result<()> {
        for (k, d) in obj {
            let v = point_index(names, k, &format!("{at}.{k}"))?;
            q.set(v, q.get(v) + as_u32(d, &format!("{at}.{k}"))?);
        }
        Ok(())
    };
    match v {
        Value::Object(obj) => put(obj, at)?,
        Value::Array(items) => {
            for (j, it) in items.iter().enumerate() {
                let at = format!("{at}[{j}]");
                put(as_object(it, &at)?, &at)?;
            }
        }
        _ => return Err(violation(at, "expected a scenario object or list")),
    }
    Ok(q)
}

/// Parses the `.svrp.json` format.
pub fn parse_instance(text: &str) -> Result<StochVrpInstance> {
    let root_v = parse_json(text)?;
    let obj = as_object(&root_v, "$")?;
    let names: Vec<String> = as_array(field(obj, "points", "$")?, "$.points")?
        .iter()
        .enumerate()
        .map(|(i, v)| as_name(v, &format!("$.points[{i}]")))
        .collect::<Result<_>>()?;
    let uniq: BTreeSet<&String> = names.iter().collect();
    if uniq.len() != names.len() {
        return Err(violation("$.points", "duplicate point name"));
    }
    let root_name = as_name(field(obj, "root", "$")?, "$.root")?;
    let root = point_index(&names, &root_name, "$.root")?;
    let rows = as_array(field(obj, "dist", "$")?, "$.dist")?;
    if rows.len() != names.len() {
        return Err(violation("$.dist", format!("expected {} rows", names.len())));
    }
    let mut dist = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let at = format!("$.dist[{i}]");
        let row = as_array(row, &at)?;
        if row.len() != names.len() {
            return Err(violation(&at, format!("expected {} entries", names.len())));
        }
        dist.push(
            row.iter()
                .enumerate()
                .map(|(j, d)| as_rational(d, &format!("$.dist[{i}][{j}]")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let metric = Metric::new(names.clone(), root, dist).map_err(|e| violation("$.dist", e.to_string()))?;
    let capacity = as_u32(field(obj, "capacity", "$")?, "$.capacity")?;
    let lambda = as_rational(field(obj, "lambda", "$")?, "$.lambda")?;
    let demands = match (obj.get("scenarios"), obj.get("indep")) {
        (Some(_), Some(_)) => return Err(violation("$", "give either \"scenarios\" or \"indep\", not both")),
        (None, None) => return Err(violation("$.scenarios", "missing field")),
        (Some(s), None) => {
            let list = as_array(s, "$.scenarios")?;
            if obj.contains_key("probabilities") {
                return Err(violation("$.probabilities", "scenarios are equiprobable"));
            }
            let scen = list
                .iter()
                .enumerate()
                .map(|(i, v)| parse_scenario(v, &names, &format!("$.scenarios[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Demands::Scenarios(ScenarioSet::new(scen).map_err(|e| violation("$.scenarios", e.to_string()))?)
        }
        (None, Some(ind)) => {
            let map = as_object(ind, "$.indep")?;
            let mut supports = vec![vec![(0u32, Rational::one())]; names.len()];
            for (k, list) in map {
                let at = format!("$.indep.{k}");
                let v = point_index(&names, k, &at)?;
                let mut sup = Vec::new();
                for (j, pair) in as_array(list, &at)?.iter().enumerate() {
                    let at = format!("{at}[{j}]");
                    let pair = as_array(pair, &at)?;
                    if pair.len() != 2 {
                        return Err(violation(&at, "expected [demand, probability]"));
                    }
                    sup.push((as_u32(&pair[0], &at)?, as_rational(&pair[1], &at)?));
                }
                supports[v] = sup;
            }
            Demands::Independent(IndepDistribution::new(supports).map_err(|e| violation("$.indep", e.to_string()))?)
        }
    };
    StochVrpInstance::new(metric, capacity, lambda, demands).map_err(|e| violation("$", e.to_string()))
}

pub fn instance_to_json(inst: &StochVrpInstance) -> Value {
    let m = &inst.metric;
    let names = m.names();
    let dist: Vec<Vec<String>> = m.matrix().iter().map(|row| row.iter().map(rational::format).collect()).collect();
    let mut obj = Map::new();
    obj.insert("points".into(), json!(names));
    obj.insert("root".into(), json!(m.name(m.root())));
    obj.insert("dist".into(), json!(dist));
    obj.insert("capacity".into(), json!(inst.capacity));
    obj.insert("lambda".into(), json!(rational::format(&inst.lambda)));
    match &inst.demands {
        Demands::Scenarios(set) => {
            let list: Vec<Value> = set
                .scenarios()
                .iter()
                .map(|q| Value::Array(q.support().into_iter().map(|v| json!({ names[v].clone(): q.get(v) })).collect()))
                .collect();
            obj.insert("scenarios".into(), Value::Array(list));
        }
        Demands::Independent(dist) => {
            let mut map = Map::new();
            for v in 0..dist.len() {
                let sup = dist.support(v);
                if sup.len() == 1 && sup[0].0 == 0 {
                    continue;
                }
                let pairs: Vec<Value> = sup.iter().map(|(q, p)| json!([q, rational::format(p)])).collect();
                map.insert(names[v].clone(), Value::Array(pairs));
            }
            obj.insert("indep".into(), Value::Object(map));
        }
    }
    Value::Object(obj)
}

pub fn serialize_instance(inst: &StochVrpInstance) -> String {
    let mut s = serde_json::to_string_pretty(&instance_to_json(inst)).unwrap_or_default();
    s.push('\n');
    s
}

/// A `k`-uniform hypergraph over named vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub k: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<Vec<String>>,
}

impl Hypergraph {
    /// Named `0..n`, edges given by index.
    pub fn from_indices(k: usize, n: usize, edges: &[Vec<usize>]) -> Self {
        Self {
            k,
            vertices: (0..n).map(|v| format!("u{v}")).collect(),
            edges: edges.iter().map(|e| e.iter().map(|&v| format!("u{v}")).collect()).collect(),
        }
    }

    pub fn edge_indices(&self) -> Result<Vec<Vec<usize>>> {
        self.edges
            .iter()
            .map(|e| {
                e.iter()
                    .map(|v| {
                        self.vertices
                            .iter()
                            .position(|x| x == v)
                            .ok_or_else(|| Error::InvalidInstance(format!("unknown vertex {v:?}")))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v = parse_json(text)?;
        let obj = as_object(&v, "$")?;
        let k = as_u32(field(obj, "k", "$")?, "$.k")? as usize;
        let vertices = as_array(field(obj, "vertices", "$")?, "$.vertices")?
            .iter()
            .enumerate()
            .map(|(i, x)| as_name(x, &format!("$.vertices[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let edges = as_array(field(obj, "edges", "$")?, "$.edges")?
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let at = format!("$.edges[{i}]");
                as_array(e, &at)?.iter().map(|x| as_name(x, &at)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { k, vertices, edges })
    }

    pub fn serialize(&self) -> String {
        let mut s = serde_json::to_string_pretty(&json!({
            "k": self.k,
            "vertices": self.vertices,
            "edges": self.edges,
        }))
        .unwrap_or_default();
        s.push('\n');
        s
    }
}

/// Parameters of the hardness construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardnessParams {
    /// `d(r, u) = |U| / 2k + 1/2`
    pub depot_distance: Rational,
    /// `2 m |U| (k + 1)`
    pub lambda: Rational,
}

pub fn hardness_params(k: usize, num_vertices: usize, num_edges: usize) -> HardnessParams {
    let u = num_vertices as i128;
    let k = k as i128;
    HardnessParams {
        depot_distance: Rational::new(u, 2 * k) + Rational::new(1, 2),
        lambda: Rational::from_integer(2 * num_edges as i128 * u * (k + 1)),
    }
}

/// Star-like metric (`d(r,u) = L`, `d(u,u') = 1`), unit capacity, one
/// equiprobable scenario per hyperedge with unit demand on its vertices.
pub fn gen_hardness(h: &Hypergraph) -> Result<StochVrpInstance> {
    if h.k < 2 {
        return Err(Error::NotUniform(format!("k = {} is below 2", h.k)));
    }
    let edges = h.edge_indices()?;
    for (i, e) in edges.iter().enumerate() {
        let distinct: BTreeSet<usize> = e.iter().copied().collect();
        if e.len() != h.k || distinct.len() != h.k {
            return Err(Error::NotUniform(format!("hyperedge {i} has {} distinct vertices, expected {}", distinct.len(), h.k)));
        }
    }
    if edges.is_empty() {
        return Err(Error::InvalidInstance("hypergraph has no edges".into()));
    }
    let nu = h.vertices.len();
    let p = hardness_params(h.k, nu, edges.len());
    let n = nu + 1;
    let mut dist = vec![vec![Rational::zero(); n]; n];
    for u in 1..n {
        dist[0][u] = p.depot_distance;
        dist[u][0] = p.depot_distance;
        for w in 1..n {
            if u != w {
                dist[u][w] = Rational::one();
            }
        }
    }
    let mut names = vec!["r".to_string()];
    names.extend(h.vertices.iter().cloned());
    let metric = Metric::new(names, 0, dist)?;
    let scen = edges
        .iter()
        .map(|e| {
            let mut q = DemandVector::zeros(n);
            for &v in e {
                q.set(v + 1, 1);
            }
            q
        })
        .collect();
    StochVrpInstance::new(metric, 1, p.lambda, Demands::Scenarios(ScenarioSet::new(scen)?))
}

/// Random `k`-partite `k`-uniform hypergraph with the given part sizes and
/// `num_edges` distinct edges (fewer if not available); every vertex lies on
/// some edge when possible.
pub fn random_k_partite(parts: &[usize], num_edges: usize, seed: u64) -> Hypergraph {
    let k = parts.len();
    let mut rng = seed::rng(seed);
    let mut offset = Vec::with_capacity(k);
    let mut acc = 0;
    for &s in parts {
        offset.push(acc);
        acc += s;
    }
    let n = acc;
    let mut edges: BTreeSet<Vec<usize>> = BTreeSet::new();
    let total: usize = parts.iter().product();
    let want = num_edges.min(total);
    // Cover every vertex first.
    let longest = parts.iter().copied().max().unwrap_or(0);
    for i in 0..longest {
        if edges.len() >= want {
            break;
        }
        let e: Vec<usize> = (0..k).map(|p| offset[p] + (i + p) % parts[p].max(1)).collect();
        edges.insert(e);
    }
    while edges.len() < want {
        let e: Vec<usize> = (0..k).map(|p| offset[p] + rng.gen_range(0..parts[p])).collect();
        edges.insert(e);
    }
    let idx: Vec<Vec<usize>> = edges.into_iter().collect();
    Hypergraph::from_indices(k, n, &idx)
}

/// Random graph (`k = 2`) on `n` vertices with edge probability `p`,
/// resampled until it has no isolated vertex and is not bipartite.
pub fn random_dense_graph(n: usize, p: f64, seed: u64) -> Hypergraph {
    for attempt in 0u64.. {
        let mut rng = seed::rng(seed::derive(seed, attempt));
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push(vec![u, v]);
                }
            }
        }
        let mut deg = vec![0; n];
        for e in &edges {
            deg[e[0]] += 1;
            deg[e[1]] += 1;
        }
        if deg.iter().all(|&d| d > 0) && !is_bipartite(n, &edges) {
            return Hypergraph::from_indices(2, n, &edges);
        }
    }
    unreachable!()
}

pub fn is_bipartite(n: usize, edges: &[Vec<usize>]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e[0]].push(e[1]);
        adj[e[1]].push(e[0]);
    }
    let mut color = vec![None; n];
    for s in 0..n {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(false);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                match color[w] {
                    None => {
                        color[w] = Some(!color[u].unwrap_or(false));
                        stack.push(w);
                    }
                    Some(c) if Some(c) == color[u] => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Random points on a 1/1000 grid in the unit square; distances are
/// Euclidean rounded to the grid and closed under shortest paths. Each
/// customer is active in a scenario with probability `density`, then
/// carries `1 + Bin(Q - 1, 1/2)` units.
pub fn gen_random(n: usize, m: usize, capacity: u32, lambda: Rational, density: f64, seed: u64) -> Result<StochVrpInstance> {
    let metric = random_metric(n, seed::derive(seed, 0))?;
    let mut rng = seed::rng(seed::derive(seed, 1));
    let scen = (0..m)
        .map(|_| {
            let mut q = DemandVector::zeros(n);
            for v in 1..n {
                if rng.gen::<f64>() < density {
                    let extra = (1..capacity).filter(|_| rng.gen::<bool>()).count() as u32;
                    q.set(v, 1 + extra);
                }
            }
            q
        })
        .collect();
    StochVrpInstance::new(metric, capacity, lambda, Demands::Scenarios(ScenarioSet::new(scen)?))
}

/// Like [`gen_random`] with independent demands: each customer is present
/// with probability `density` and then uniform on `1..=Q`.
pub fn gen_random_indep(n: usize, capacity: u32, lambda: Rational, density: Rational, seed: u64) -> Result<StochVrpInstance> {
    let metric = random_metric(n, seed::derive(seed, 0))?;
    let mut supports = vec![vec![(0, Rational::one())]];
    let share = density / Rational::from_integer(capacity as i128);
    for _ in 1..n {
        let mut s = vec![(0, Rational::one() - density)];
        s.extend((1..=capacity).map(|q| (q, share)));
        supports.push(s);
    }
    StochVrpInstance::new(metric, capacity, lambda, Demands::Independent(IndepDistribution::new(supports)?))
}

/// `n` points (the first is the depot `r`) on the unit-square grid.
pub fn random_metric(n: usize, seed: u64) -> Result<Metric> {
    if n < 2 {
        return Err(Error::InvalidInstance("need at least two points".into()));
    }
    let mut rng = seed::rng(seed);
    let mut pts: Vec<(i64, i64)> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.gen_range(0..=1000), rng.gen_range(0..=1000));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let dist: Vec<Vec<Rational>> = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| {
                    let dx = (a.0 - b.0) as f64;
                    let dy = (a.1 - b.1) as f64;
                    Rational::new(((dx * dx + dy * dy).sqrt()).round() as i128, 1000)
                })
                .collect()
        })
        .collect();
    let mut names = vec!["r".to_string()];
    names.extend((1..n).map(|i| format!("p{i}")));
    Metric::from_closure(names, 0, dist)
}

/// The three-point example: `d(r,a) = 1`, `d(r,b) = 2`, `d(a,b) = 1`,
/// `Q = 1`, scenarios `{a:1}` and `{b:1}`.
pub fn core_example(lambda: Rational) -> StochVrpInstance {
    let i = |x: i64| Rational::from_integer(x as i128);
    let metric = Metric::new(
        vec!["r".into(), "a".into(), "b".into()],
        0,
        vec![vec![i(0), i(1), i(2)], vec![i(1), i(0), i(1)], vec![i(2), i(1), i(0)]],
    )
    .expect("valid metric");
    let scen = ScenarioSet::new(vec![DemandVector::new(vec![0, 1, 0]), DemandVector::new(vec![0, 0, 1])]).expect("nonempty");
    StochVrpInstance::new(metric, 1, lambda, Demands::Scenarios(scen)).expect("valid instance")
}

/// Four customers at unit distance from the depot and from each other,
/// each with an independent unit demand with probability 1/2; `Q = 2`.
pub fn bernoulli_example(lambda: Rational) -> StochVrpInstance {
    let n = 5;
    let mut dist = vec![vec![Rational::zero(); n]; n];
    for u in 0..n {
        for v in 0..n {
            if u != v {
                dist[u][v] = if u == 0 || v == 0 { Rational::from_integer(2) } else { Rational::from_integer(1) };
            }
        }
    }
    let names = vec!["r".into(), "a".into(), "b".into(), "c".into(), "d".into()];
    let metric = Metric::new(names, 0, dist).expect("valid metric");
    let dist = IndepDistribution::bernoulli(n, &[1, 2, 3, 4], 1, Rational::new(1, 2)).expect("valid");
    StochVrpInstance::new(metric, 2, lambda, Demands::Independent(dist)).expect("valid instance")
}

/// Keeps only the scenario list order-insensitive summary used in tests:
/// multiplicities of distinct scenarios.
pub fn scenario_histogram(set: &ScenarioSet) -> BTreeMap<DemandVector, usize> {
    let mut h = BTreeMap::new();
    for q in set.scenarios() {
        *h.entry(q.clone()).or_insert(0) += 1;
    }
    h
}
