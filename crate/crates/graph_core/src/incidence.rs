use std::ops::Range;

use linalg::{max_abs, pseudo_inverse};
use nalgebra::DMatrix;

use crate::{check_clusters_strongly_connected, ClusterPartition, DirectedNetwork, GraphError};

/// Bound on `‖Bᵀ − R B̂ᵀ‖_∞` for a well-formed incidence set.
pub const LEMMA_RESIDUAL_BOUND: f64 = 1e-9;

/// Oriented incidence matrices of a network, a spanning tree, and the transfer
/// matrices that express every edge difference through tree coordinates.
///
/// Edge columns are ordered intra-cluster first (grouped by cluster, canonical
/// order inside a group) and inter-cluster last. Tree columns follow the same
/// rule, so `x = B̂_intraᵀθ` stacks the clusters' coordinates in order.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceSet {
    /// Network edge index (into `DirectedNetwork::edges`) of each column.
    pub edge_order: Vec<usize>,
    /// `(source, target)` of each column.
    pub edges: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
    pub tree: Vec<(usize, usize)>,
    pub b: DMatrix<f64>,
    pub b_pos: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub r1: DMatrix<f64>,
    pub r2: DMatrix<f64>,
    pub r3: DMatrix<f64>,
    pub p_intra: DMatrix<f64>,
    pub p_inter: DMatrix<f64>,
    cluster_edges: Vec<Range<usize>>,
    cluster_tree: Vec<Range<usize>>,
    m_intra: usize,
    n_intra_tree: usize,
}

impl IncidenceSet {
    pub fn n(&self) -> usize {
        self.b.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn r_clusters(&self) -> usize {
        self.cluster_tree.len()
    }
    pub fn m_intra(&self) -> usize {
        self.m_intra
    }
    /// Dimension of `x`, i.e. `n − r`.
    pub fn n_intra_tree(&self) -> usize {
        self.n_intra_tree
    }
    /// Columns of `B` holding cluster `k`'s intra edges.
    pub fn cluster_edge_range(&self, k: usize) -> Range<usize> {
        self.cluster_edges[k].clone()
    }
    /// Columns of `B̂` (equivalently entries of `x`) for cluster `k`.
    pub fn cluster_tree_range(&self, k: usize) -> Range<usize> {
        self.cluster_tree[k].clone()
    }
    pub fn inter_edge_range(&self) -> Range<usize> {
        self.m_intra..self.m()
    }

    fn cols(m: &DMatrix<f64>, r: Range<usize>) -> DMatrix<f64> {
        m.columns(r.start, r.len()).clone_owned()
    }
    pub fn b_intra(&self) -> DMatrix<f64> {
        Self::cols(&self.b, 0..self.m_intra)
    }
    pub fn b_inter(&self) -> DMatrix<f64> {
        Self::cols(&self.b, self.inter_edge_range())
    }
    pub fn b_pos_intra(&self) -> DMatrix<f64> {
        Self::cols(&self.b_pos, 0..self.m_intra)
    }
    pub fn b_pos_inter(&self) -> DMatrix<f64> {
        Self::cols(&self.b_pos, self.inter_edge_range())
    }
    pub fn b_hat_intra(&self) -> DMatrix<f64> {
        Self::cols(&self.b_hat, 0..self.n_intra_tree)
    }
    pub fn b_hat_inter(&self) -> DMatrix<f64> {
        Self::cols(&self.b_hat, self.n_intra_tree..self.b_hat.ncols())
    }
    /// `B̂_intra^(k)`: n × (n_k − 1).
    pub fn b_hat_cluster(&self, k: usize) -> DMatrix<f64> {
        Self::cols(&self.b_hat, self.cluster_tree_range(k))
    }
    /// `𝔅_intra^(k)`: n × m_k.
    pub fn b_pos_cluster(&self, k: usize) -> DMatrix<f64> {
        Self::cols(&self.b_pos, self.cluster_edge_range(k))
    }
    /// Diagonal block of `R1` mapping cluster `k`'s coordinates to its edge differences.
    pub fn r1_cluster(&self, k: usize) -> DMatrix<f64> {
        let (re, rt) = (self.cluster_edge_range(k), self.cluster_tree_range(k));
        self.r1.view((re.start, rt.start), (re.len(), rt.len())).clone_owned()
    }
    pub fn cluster_weights(&self, k: usize) -> Vec<f64> {
        self.weights[self.cluster_edge_range(k)].to_vec()
    }
    pub fn inter_weights(&self) -> Vec<f64> {
        self.weights[self.inter_edge_range()].to_vec()
    }
    /// Column of the edge `source → target`, if present.
    pub fn column_of(&self, source: usize, target: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == (source, target))
    }

    /// `‖Bᵀ − R B̂ᵀ‖_∞` as a max-abs entry.
    pub fn lemma_residual(&self) -> f64 {
        max_abs(&(self.b.transpose() - &self.r * self.b_hat.transpose()))
    }
}

fn incidence_matrix(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, edges.len());
    for (c, &(s, t)) in edges.iter().enumerate() {
        b[(s, c)] = -1.0;
        b[(t, c)] = 1.0;
    }
    b
}

fn check_tree(
    net: &DirectedNetwork,
    partition: &ClusterPartition,
    tree: &[(usize, usize)],
) -> Result<(), GraphError> {
    let n = net.n();
    if tree.len() + 1 != n {
        return Err(GraphError::NotSpanningTree(format!(
            "{} edges given, {} required",
            tree.len(),
            n - 1
        )));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut intra_count = vec![0usize; partition.r()];
    for &(s, t) in tree {
        if s >= n || t >= n {
            return Err(GraphError::NodeOutOfRange { node: s.max(t), n });
        }
        if !net.has_edge(s, t) && !net.has_edge(t, s) {
            return Err(GraphError::NotSpanningTree(format!("({s}, {t}) is not a network edge")));
        }
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        if a == b {
            return Err(GraphError::NotSpanningTree(format!("({s}, {t}) closes a cycle")));
        }
        parent[a] = b;
        if partition.same_cluster(s, t) {
            intra_count[partition.cluster_of(s)] += 1;
        }
    }
    for (k, &c) in intra_count.iter().enumerate() {
        if c + 1 != partition.cluster(k).len() {
            return Err(GraphError::NotSpanningTree(format!(
                "intra-cluster edges do not span cluster {k}"
            )));
        }
    }
    Ok(())
}

/// Assembles the incidence set for `net`, `partition` and a spanning `tree`.
///
/// With `P_inter = I − B̂_inter B̂_inter†` and `P_intra = I − B̂_intra B̂_intra†`:
/// `R1 = B_intraᵀ (B̂_intraᵀ P_inter)†`, `R2 = B_interᵀ (B̂_intraᵀ P_inter)†`,
/// `R3 = B_interᵀ (B̂_interᵀ P_intra)†`, and `R = [[R1, 0], [R2, R3]]`.
pub fn build_incidence(
    net: &DirectedNetwork,
    partition: &ClusterPartition,
    tree: &[(usize, usize)],
) -> Result<IncidenceSet, GraphError> {
    check_clusters_strongly_connected(net, partition)?;
    check_tree(net, partition, tree)?;
    let n = net.n();
    let r = partition.r();

    let mut edge_order = Vec::new();
    let mut cluster_edges = Vec::with_capacity(r);
    for k in 0..r {
        let start = edge_order.len();
        for (idx, e) in net.edges().iter().enumerate() {
            if partition.cluster_of(e.source) == k && partition.cluster_of(e.target) == k {
                edge_order.push(idx);
            }
        }
        cluster_edges.push(start..edge_order.len());
    }
    let m_intra = edge_order.len();
    for (idx, e) in net.edges().iter().enumerate() {
        if !partition.same_cluster(e.source, e.target) {
            edge_order.push(idx);
        }
    }
    let edges: Vec<(usize, usize)> = edge_order
        .iter()
        .map(|&i| (net.edges()[i].source, net.edges()[i].target))
        .collect();
    let weights: Vec<f64> = edge_order.iter().map(|&i| net.edges()[i].weight).collect();

    let mut ordered_tree = Vec::with_capacity(n - 1);
    let mut cluster_tree = Vec::with_capacity(r);
    for k in 0..r {
        let start = ordered_tree.len();
        let mut part: Vec<_> = tree
            .iter()
            .copied()
            .filter(|&(s, t)| partition.cluster_of(s) == k && partition.cluster_of(t) == k)
            .collect();
        part.sort_unstable();
        ordered_tree.extend(part);
        cluster_tree.push(start..ordered_tree.len());
    }
    let n_intra_tree = ordered_tree.len();
    let mut inter_tree: Vec<_> =
        tree.iter().copied().filter(|&(s, t)| !partition.same_cluster(s, t)).collect();
    inter_tree.sort_unstable();
    ordered_tree.extend(inter_tree);

    let b = incidence_matrix(n, &edges);
    let b_pos = b.map(|v| v.max(0.0));
    let b_hat = incidence_matrix(n, &ordered_tree);

    let b_intra = b.columns(0, m_intra).clone_owned();
    let b_inter = b.columns(m_intra, b.ncols() - m_intra).clone_owned();
    let bh_intra = b_hat.columns(0, n_intra_tree).clone_owned();
    let bh_inter = b_hat.columns(n_intra_tree, b_hat.ncols() - n_intra_tree).clone_owned();
    let id = DMatrix::<f64>::identity(n, n);
    let p_inter = &id - &bh_inter * pseudo_inverse(&bh_inter);
    let p_intra = &id - &bh_intra * pseudo_inverse(&bh_intra);
    let x_map = pseudo_inverse(&(bh_intra.transpose() * &p_inter));
    let y_map = pseudo_inverse(&(bh_inter.transpose() * &p_intra));
    let r1 = b_intra.transpose() * &x_map;
    let r2 = b_inter.transpose() * &x_map;
    let r3 = b_inter.transpose() * &y_map;

    let m = edges.len();
    let mut r_full = DMatrix::zeros(m, n - 1);
    r_full.view_mut((0, 0), (m_intra, n_intra_tree)).copy_from(&r1);
    r_full.view_mut((m_intra, 0), (m - m_intra, n_intra_tree)).copy_from(&r2);
    r_full
        .view_mut((m_intra, n_intra_tree), (m - m_intra, n - 1 - n_intra_tree))
        .copy_from(&r3);

    Ok(IncidenceSet {
        edge_order,
        edges,
        weights,
        tree: ordered_tree,
        b,
        b_pos,
        b_hat,
        r: r_full,
        r1,
        r2,
        r3,
        p_intra,
        p_inter,
        cluster_edges,
        cluster_tree,
        m_intra,
        n_intra_tree,
    })
}
