use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::GraphError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Weighted directed graph with positive weights and no self-loops.
///
/// Edges are kept sorted by `(source, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedNetwork {
    n: usize,
    edges: Vec<Edge>,
    adjacency: DMatrix<f64>,
}

impl DirectedNetwork {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, GraphError> {
        let mut list = Vec::new();
        let mut adjacency = DMatrix::zeros(n, n);
        for (source, target, weight) in edges {
            for node in [source, target] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if source == target {
                return Err(GraphError::SelfLoop(source));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(GraphError::InvalidWeight { source_node: source, target, weight });
            }
            if adjacency[(target, source)] != 0.0 {
                return Err(GraphError::DuplicateEdge(source, target));
            }
            adjacency[(target, source)] = weight;
            list.push(Edge { source, target, weight });
        }
        list.sort_by_key(|e| (e.source, e.target));
        Ok(Self { n, edges: list, adjacency })
    }

    /// Builds the edge set from an adjacency matrix with `w_ij` = weight of `j → i`.
    pub fn from_adjacency(w: &DMatrix<f64>) -> Result<Self, GraphError> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(GraphError::DimensionMismatch { expected: n, found: w.ncols() });
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = w[(i, j)];
                if v != 0.0 {
                    edges.push((j, i, v));
                }
            }
        }
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// `w_ij`: weight of the edge `j → i`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.adjacency[(target, source)] > 0.0
    }

    pub fn edge_index(&self, source: usize, target: usize) -> Option<usize> {
        self.edges
            .binary_search_by_key(&(source, target), |e| (e.source, e.target))
            .ok()
    }

    /// Neighbours ignoring direction.
    pub fn undirected_neighbors(&self, v: usize) -> BTreeSet<usize> {
        (0..self.n)
            .filter(|&u| u != v && (self.has_edge(u, v) || self.has_edge(v, u)))
            .collect()
    }
}

/// Disjoint cover of the nodes by clusters of at least two nodes each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    clusters: Vec<Vec<usize>>,
    membership: Vec<usize>,
}

impl ClusterPartition {
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let mut membership = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(clusters.len());
        for (k, cluster) in clusters.into_iter().enumerate() {
            if cluster.len() < 2 {
                return Err(GraphError::InvalidPartition(format!(
                    "cluster {k} has fewer than two nodes"
                )));
            }
            let mut c = cluster;
            c.sort_unstable();
            for &v in &c {
                if v >= n {
                    return Err(GraphError::NodeOutOfRange { node: v, n });
                }
                if membership[v] != usize::MAX {
                    return Err(GraphError::InvalidPartition(format!(
                        "node {v} appears in more than one cluster"
                    )));
                }
                membership[v] = k;
            }
            sorted.push(c);
        }
        if let Some(v) = membership.iter().position(|&m| m == usize::MAX) {
            return Err(GraphError::InvalidPartition(format!("node {v} is not covered")));
        }
        Ok(Self { clusters: sorted, membership })
    }

    pub fn r(&self) -> usize {
        self.clusters.len()
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster(&self, k: usize) -> &[usize] {
        &self.clusters[k]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.membership[v]
    }

    pub fn same_cluster(&self, a: usize, b: usize) -> bool {
        self.membership[a] == self.membership[b]
    }
}

fn reaches_all(net: &DirectedNetwork, nodes: &[usize], forward: bool) -> bool {
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut seen = BTreeSet::from([nodes[0]]);
    let mut stack = vec![nodes[0]];
    while let Some(v) = stack.pop() {
        for &u in &inside {
            let linked = if forward { net.has_edge(v, u) } else { net.has_edge(u, v) };
            if linked && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen.len() == inside.len()
}

/// Every cluster's induced subgraph must be strongly connected.
pub fn check_clusters_strongly_connected(
    net: &DirectedNetwork,
    partition: &ClusterPartition,
) -> Result<(), GraphError> {
    if partition.n() != net.n() {
        return Err(GraphError::DimensionMismatch { expected: net.n(), found: partition.n() });
    }
    for (k, c) in partition.clusters().iter().enumerate() {
        if !reaches_all(net, c, true) || !reaches_all(net, c, false) {
            return Err(GraphError::DisconnectedCluster { cluster: k });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_convention() {
        let net = DirectedNetwork::new(3, [(0, 1, 2.0), (1, 0, 0.5), (2, 1, 1.0)]).unwrap();
        assert_eq!(net.weight(1, 0), 2.0);
        assert_eq!(net.weight(0, 1), 0.5);
        assert!(net.has_edge(2, 1) && !net.has_edge(1, 2));
        assert_eq!(net.edge_index(1, 0), Some(1));
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(DirectedNetwork::new(2, [(0, 0, 1.0)]), Err(GraphError::SelfLoop(0)));
        assert!(DirectedNetwork::new(2, [(0, 1, 0.0)]).is_err());
        assert!(DirectedNetwork::new(2, [(0, 1, 1.0), (0, 1, 2.0)]).is_err());
        assert!(DirectedNetwork::new(2, [(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(ClusterPartition::new(4, vec![vec![0, 1], vec![2, 3]]).is_ok());
        assert!(ClusterPartition::new(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(ClusterPartition::new(4, vec![vec![0, 1, 2]]).is_err());
        assert!(ClusterPartition::new(3, vec![vec![0], vec![1, 2]]).is_err());
    }

    #[test]
    fn strong_connectivity() {
        let one_way = DirectedNetwork::new(2, [(0, 1, 1.0)]).unwrap();
        let p = ClusterPartition::new(2, vec![vec![0, 1]]).unwrap();
        assert_eq!(
            check_clusters_strongly_connected(&one_way, &p),
            Err(GraphError::DisconnectedCluster { cluster: 0 })
        );
        let both = DirectedNetwork::new(2, [(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        assert!(check_clusters_strongly_connected(&both, &p).is_ok());
    }
}
