//! Random hierarchical tree embeddings (FRT style) rooted at the depot.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Metric, RTour};
use crate::rational;
use crate::seed;

/// One cluster of the raw hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub parent: Option<usize>,
    pub level: u32,
    pub members: Vec<usize>,
    /// Length of the edge to the parent, in original units.
    pub edge_len: f64,
}

/// Laminar decomposition produced by one draw of the embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub clusters: Vec<Cluster>,
    pub levels: u32,
    pub beta: f64,
    /// Factor that maps original distances to the scaled ones.
    pub scale: f64,
}

/// Rooted tree whose root is the depot's node. Edge `e` is identified with
/// its lower endpoint, so edge ids are `1..num_nodes()`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMetric {
    parent: Vec<Option<usize>>,
    len: Vec<f64>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    node_of: Vec<usize>,
    points_at: Vec<Vec<usize>>,
    levels: u32,
}

impl TreeMetric {
    /// Builds a tree from parent pointers. Node 0 must be the root and
    /// `node_of[p]` gives the node of metric point `p`.
    pub fn from_parents(parent: Vec<Option<usize>>, len: Vec<f64>, node_of: Vec<usize>) -> Result<Self> {
        let n = parent.len();
        if n == 0 || parent[0].is_some() || parent.iter().skip(1).any(|p| p.is_none()) || len.len() != n {
            return Err(Error::InvalidInstance("tree must have a single root at node 0".into()));
        }
        let mut children = vec![Vec::new(); n];
        for v in 1..n {
            let p = parent[v].unwrap();
            if p >= n {
                return Err(Error::InvalidInstance("tree parent out of range".into()));
            }
            children[p].push(v);
        }
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        let mut stack = vec![0usize];
        let mut seen = 1;
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != n {
            return Err(Error::InvalidInstance("parent pointers do not form a tree".into()));
        }
        let mut points_at = vec![Vec::new(); n];
        for (p, &v) in node_of.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidInstance("point mapped outside the tree".into()));
            }
            points_at[v].push(p);
        }
        let levels = depth.iter().copied().max().unwrap_or(0) as u32;
        Ok(Self { parent, len, children, depth, node_of, points_at, levels })
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    /// Edge ids (non-root nodes) in ascending order.
    pub fn edges(&self) -> std::ops::Range<usize> {
        1..self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Parent edge of edge `e`, `None` when `e` hangs from the root.
    pub fn parent_edge(&self, e: usize) -> Option<usize> {
        self.parent[e].filter(|&p| p != 0)
    }

    pub fn edge_len(&self, e: usize) -> f64 {
        self.len[e]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Realized depth of the tree, in edges.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Number of levels of the hierarchy the tree was built from.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn node_of(&self, p: usize) -> usize {
        self.node_of[p]
    }

    pub fn points_at(&self, v: usize) -> &[usize] {
        &self.points_at[v]
    }

    /// Nodes of the subtree below `v`, including `v`, in preorder.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.children[u].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Edges on the path from node `v` up to the root, bottom first.
    pub fn path_to_root(&self, mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(p) = self.parent[v] {
            out.push(v);
            v = p;
        }
        out
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap();
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
        }
        u
    }

    pub fn node_dist(&self, u: usize, v: usize) -> f64 {
        let a = self.lca(u, v);
        let up = |mut x: usize| {
            let mut s = 0.0;
            while x != a {
                s += self.len[x];
                x = self.parent[x].unwrap();
            }
            s
        };
        up(u) + up(v)
    }

    /// Tree distance between two metric points.
    pub fn tree_dist(&self, p: usize, q: usize) -> f64 {
        self.node_dist(self.node_of[p], self.node_of[q])
    }

    pub fn edges_length(&self, edges: &[usize]) -> f64 {
        edges.iter().map(|&e| self.len[e]).sum()
    }

    /// Shortcut Euler tour of the rooted subtree spanned by `edges`.
    pub fn lift_tour(&self, metric: &Metric, edges: &[usize]) -> Result<RTour> {
        let n = self.num_nodes();
        let mut inside = vec![false; n];
        inside[0] = true;
        for &e in edges {
            if e == 0 || e >= n {
                return Err(Error::DisconnectedSubtree);
            }
            inside[e] = true;
        }
        for &e in edges {
            if !inside[self.parent[e].unwrap()] {
                return Err(Error::DisconnectedSubtree);
            }
        }
        let mut order = Vec::new();
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            order.extend(self.points_at[u].iter().copied());
            for &c in self.children[u].iter().rev() {
                if inside[c] {
                    stack.push(c);
                }
            }
        }
        Ok(RTour::through(metric, &order))
    }
}

/// Draws the raw cluster hierarchy.
pub fn hierarchy(metric: &Metric, seed: u64) -> Hierarchy {
    let n = metric.len();
    let mut rng = seed::rng(seed);
    let scale = metric
        .min_positive_distance()
        .map(|d| 1.0 / rational::to_f64(&d))
        .unwrap_or(1.0);
    let delta = rational::to_f64(&metric.diameter()) * scale;
    let levels: u32 = if delta <= 0.0 { 0 } else { delta.log2().ceil().max(0.0) as u32 + 1 };
    let beta: f64 = rng.gen_range(1.0..2.0);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let mut clusters = vec![Cluster { parent: None, level: levels, members: (0..n).collect(), edge_len: 0.0 }];
    let mut frontier = vec![0usize];
    for i in (0..levels).rev() {
        let radius = beta * 2f64.powi(i as i32 - 1);
        let edge_len = 2f64.powi(i as i32 + 1) / scale;
        let mut next = Vec::new();
        for &c in &frontier {
            let mut assigned = vec![false; n];
            let members = clusters[c].members.clone();
            for &center in &perm {
                let part: Vec<usize> = members
                    .iter()
                    .copied()
                    .filter(|&v| !assigned[v] && metric.df(center, v) * scale <= radius + 1e-9)
                    .collect();
                if part.is_empty() {
                    continue;
                }
                for &v in &part {
                    assigned[v] = true;
                }
                clusters.push(Cluster { parent: Some(c), level: i, members: part, edge_len });
                next.push(clusters.len() - 1);
            }
        }
        frontier = next;
    }
    Hierarchy { clusters, levels, beta, scale }
}

/// Tree embedding rooted at the depot. Clusters on the path from the
/// depot's leaf to the top are re-hung below it, and pass-through Steiner
/// nodes are spliced out.
pub fn embed(metric: &Metric, seed: u64) -> TreeMetric {
    let h = hierarchy(metric, seed);
    tree_from_hierarchy(metric, &h)
}

pub fn tree_from_hierarchy(metric: &Metric, h: &Hierarchy) -> TreeMetric {
    let k = h.clusters.len();
    // Undirected adjacency with edge lengths.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for (c, cl) in h.clusters.iter().enumerate() {
        if let Some(p) = cl.parent {
            adj[c].push((p, cl.edge_len));
            adj[p].push((c, cl.edge_len));
        }
    }
    let mut leaf_of = vec![0usize; metric.len()];
    for (c, cl) in h.clusters.iter().enumerate() {
        if cl.level == 0 {
            for &p in &cl.members {
                leaf_of[p] = c;
            }
        }
    }
    let mut holds = vec![Vec::new(); k];
    for (p, &c) in leaf_of.iter().enumerate() {
        holds[c].push(p);
    }
    let min_point = |c: usize| h.clusters[c].members.iter().copied().min().unwrap_or(usize::MAX);

    // Orient from the depot's cluster, then splice degree-2 Steiner nodes.
    let root = leaf_of[metric.root()];
    let mut par = vec![usize::MAX; k];
    let mut plen = vec![0.0; k];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut order = vec![root];
    par[root] = root;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        let mut nb: Vec<(usize, f64)> = adj[u].iter().copied().filter(|&(v, _)| par[v] == usize::MAX).collect();
        nb.sort_by_key(|&(v, _)| min_point(v));
        for (v, l) in nb {
            par[v] = u;
            plen[v] = l;
            kids[u].push(v);
            order.push(v);
        }
    }
    // Compressed tree: keep the root, point-holding clusters and branching
    // clusters.
    let keep = |c: usize| c == root || !holds[c].is_empty() || kids[c].len() != 1;
    let mut new_id = vec![usize::MAX; k];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut len = vec![0.0];
    new_id[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &c0 in &kids[u] {
            let mut c = c0;
            let mut l = plen[c];
            while !keep(c) {
                c = kids[c][0];
                l += plen[c];
            }
            new_id[c] = parent.len();
            parent.push(Some(new_id[u]));
            len.push(l);
            queue.push_back(c);
        }
    }
    let node_of = leaf_of.iter().map(|&c| new_id[c]).collect();
    let mut t = TreeMetric::from_parents(parent, len, node_of).expect("embedding yields a tree");
    t.levels = h.levels;
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::tri_metric;
    use crate::rational::int;

    fn cycle4() -> Metric {
        let names = (0..4).map(|i| format!("p{i}")).collect();
        let d = (0..4)
            .map(|i: i64| (0..4).map(|j: i64| int(((i - j).rem_euclid(4)).min((j - i).rem_euclid(4)))).collect())
            .collect();
        Metric::new(names, 0, d).unwrap()
    }

    #[test]
    fn single_point() {
        let m = Metric::new(vec!["r".into()], 0, vec![vec![int(0)]]).unwrap();
        let t = embed(&m, 1);
        assert_eq!(t.num_nodes(), 1);
        assert_eq!(t.height(), 0);
        assert_eq!(t.levels(), 0);
    }

    #[test]
    fn two_points_dominate() {
        let m = Metric::new(
            vec!["r".into(), "a".into()],
            0,
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
        )
        .unwrap();
        for s in 0..20 {
            assert!(embed(&m, s).tree_dist(0, 1) >= 1.0);
        }
    }

    #[test]
    fn domination_and_levels() {
        let m = cycle4();
        let delta = 2.0f64;
        for s in 0..200 {
            let h = hierarchy(&m, s);
            assert!(h.levels <= delta.log2().ceil() as u32 + 1);
            let t = tree_from_hierarchy(&m, &h);
            assert_eq!(t.node_of(m.root()), 0);
            for u in 0..4 {
                for v in 0..4 {
                    assert!(t.tree_dist(u, v) + 1e-12 >= m.df(u, v));
                }
            }
        }
    }

    #[test]
    fn hierarchy_lengths_halve() {
        let m = tri_metric();
        for s in 0..50 {
            let h = hierarchy(&m, s);
            for c in &h.clusters {
                if let Some(p) = c.parent {
                    let parent = &h.clusters[p];
                    assert_eq!(parent.level, c.level + 1);
                    if parent.parent.is_some() {
                        assert!((parent.edge_len - 2.0 * c.edge_len).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn expected_distortion_on_cycle() {
        let m = cycle4();
        let mut sum = vec![vec![0.0; 4]; 4];
        let trials = 2000;
        for s in 0..trials {
            let t = embed(&m, s);
            for u in 0..4 {
                for v in 0..4 {
                    sum[u][v] += t.tree_dist(u, v);
                }
            }
        }
        for u in 0..4 {
            for v in 0..4 {
                if u != v {
                    let ratio = sum[u][v] / trials as f64 / m.df(u, v);
                    assert!(ratio <= 8.0 * 2.0, "pair ({u},{v}) ratio {ratio}");
                }
            }
        }
    }

    #[test]
    fn lift_tours() {
        let m = tri_metric();
        let t = embed(&m, 3);
        assert_eq!(t.lift_tour(&m, &[]).unwrap().seq(), &[0]);
        let a = t.node_of(1);
        let path = t.path_to_root(a);
        let tour = t.lift_tour(&m, &path).unwrap();
        assert!(tour.visits(1));
        assert!(rational::to_f64(&tour.length()) <= 2.0 * t.edges_length(&path) + 1e-9);

        let mut both = t.path_to_root(t.node_of(1));
        both.extend(t.path_to_root(t.node_of(2)));
        both.sort_unstable();
        both.dedup();
        let tour = t.lift_tour(&m, &both).unwrap();
        assert!(tour.visits(1) && tour.visits(2));
        assert!(rational::to_f64(&tour.length()) <= 2.0 * t.edges_length(&both) + 1e-9);
    }

    #[test]
    fn lift_rejects_floating_edges() {
        let m = tri_metric();
        for s in 0..20 {
            let t = embed(&m, s);
            if let Some(e) = t.edges().find(|&e| t.parent_edge(e).is_some()) {
                assert_eq!(t.lift_tour(&m, &[e]), Err(Error::DisconnectedSubtree));
                return;
            }
        }
    }
}
