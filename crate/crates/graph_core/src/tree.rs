use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::{ClusterPartition, DirectedNetwork, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeStrategy {
    /// Breadth-first tree from a minimum-eccentricity root in each cluster.
    #[default]
    MinDepth,
    /// Kruskal over the canonical edge order.
    FirstFound,
}

impl FromStr for TreeStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_depth" => Ok(Self::MinDepth),
            "first_found" => Ok(Self::FirstFound),
            other => Err(format!("unknown tree strategy '{other}' (expected min_depth or first_found)")),
        }
    }
}

impl fmt::Display for TreeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MinDepth => "min_depth",
            Self::FirstFound => "first_found",
        })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = v;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Breadth-first distances inside `nodes`, ignoring edge direction.
fn bfs(net: &DirectedNetwork, nodes: &[usize], root: usize) -> BTreeMap<usize, (usize, Option<usize>)> {
    let mut seen = BTreeMap::from([(root, (0usize, None))]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let d = seen[&v].0;
        // Descending index order fixes ties between equal-depth parents.
        for &u in nodes.iter().rev() {
            if u != v && !seen.contains_key(&u) && (net.has_edge(u, v) || net.has_edge(v, u)) {
                seen.insert(u, (d + 1, Some(v)));
                queue.push_back(u);
            }
        }
    }
    seen
}

fn orient(net: &DirectedNetwork, parent: usize, child: usize) -> (usize, usize) {
    if net.has_edge(parent, child) {
        (parent, child)
    } else {
        (child, parent)
    }
}

fn min_depth_cluster(
    net: &DirectedNetwork,
    nodes: &[usize],
    k: usize,
) -> Result<Vec<(usize, usize)>, GraphError> {
    let mut best: Option<((usize, i64, f64, usize), BTreeMap<usize, (usize, Option<usize>)>)> = None;
    for &v in nodes {
        let tree = bfs(net, nodes, v);
        if tree.len() != nodes.len() {
            return Err(GraphError::DisconnectedCluster { cluster: k });
        }
        let ecc = tree.values().map(|t| t.0).max().unwrap_or(0);
        let out_degree = nodes.iter().filter(|&&u| net.has_edge(v, u)).count() as i64;
        let in_strength: f64 = nodes.iter().map(|&u| net.weight(v, u)).sum();
        let key = (ecc, -out_degree, in_strength, v);
        let better = match &best {
            None => true,
            Some((b, _)) => {
                (key.0, key.1) < (b.0, b.1)
                    || ((key.0, key.1) == (b.0, b.1)
                        && (key.2 < b.2 - 1e-12 || ((key.2 - b.2).abs() <= 1e-12 && key.3 < b.3)))
            }
        };
        if better {
            best = Some((key, tree));
        }
    }
    let (_, tree) = best.expect("cluster is non-empty");
    let mut edges: Vec<(usize, usize)> = tree
        .iter()
        .filter_map(|(&child, &(_, parent))| parent.map(|p| orient(net, p, child)))
        .collect();
    edges.sort_unstable();
    Ok(edges)
}

fn first_found_cluster(
    net: &DirectedNetwork,
    partition: &ClusterPartition,
    k: usize,
) -> Result<Vec<(usize, usize)>, GraphError> {
    let mut uf = UnionFind::new(net.n());
    let mut edges = Vec::new();
    for e in net.edges() {
        if partition.cluster_of(e.source) == k
            && partition.cluster_of(e.target) == k
            && uf.union(e.source, e.target)
        {
            edges.push((e.source, e.target));
        }
    }
    if edges.len() + 1 != partition.cluster(k).len() {
        return Err(GraphError::DisconnectedCluster { cluster: k });
    }
    Ok(edges)
}

/// Spanning tree whose intra-cluster part spans every cluster.
///
/// The result lists intra-cluster edges grouped by cluster (each group sorted
/// by `(source, target)`), followed by the `r − 1` inter-cluster edges, which
/// are picked greedily in canonical edge order.
pub fn select_spanning_tree(
    net: &DirectedNetwork,
    partition: &ClusterPartition,
    strategy: TreeStrategy,
) -> Result<Vec<(usize, usize)>, GraphError> {
    if partition.n() != net.n() {
        return Err(GraphError::DimensionMismatch { expected: net.n(), found: partition.n() });
    }
    let mut tree = Vec::with_capacity(net.n().saturating_sub(1));
    for k in 0..partition.r() {
        let part = match strategy {
            TreeStrategy::MinDepth => min_depth_cluster(net, partition.cluster(k), k)?,
            TreeStrategy::FirstFound => first_found_cluster(net, partition, k)?,
        };
        tree.extend(part);
    }
    let mut uf = UnionFind::new(partition.r());
    let mut inter = Vec::new();
    for e in net.edges() {
        let (a, b) = (partition.cluster_of(e.source), partition.cluster_of(e.target));
        if a != b && uf.union(a, b) {
            inter.push((e.source, e.target));
        }
    }
    if inter.len() + 1 != partition.r() {
        return Err(GraphError::DisconnectedNetwork);
    }
    tree.extend(inter);
    Ok(tree)
}

/// Largest undirected distance from `root` within a tree edge list.
pub fn tree_depth(tree: &[(usize, usize)], root: usize) -> usize {
    let mut depth = BTreeMap::from([(root, 0usize)]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for &(a, b) in tree {
            let other = if a == v { b } else if b == v { a } else { continue };
            if !depth.contains_key(&other) {
                depth.insert(other, d + 1);
                queue.push_back(other);
            }
        }
    }
    depth.values().copied().max().unwrap_or(0)
}
