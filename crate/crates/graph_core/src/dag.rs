use std::collections::BinaryHeap;
use std::cmp::Reverse;

use nalgebra::DMatrix;

use crate::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedEdge {
    pub source: usize,
    pub target: usize,
    /// +1 or −1.
    pub sign: i8,
}

/// Directed graph with ±1 edge labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<SignedEdge>,
    allow_self_loops: bool,
}

impl SignedGraph {
    pub fn new(n: usize, allow_self_loops: bool) -> Self {
        Self { n, edges: Vec::new(), allow_self_loops }
    }

    pub fn add_edge(&mut self, source: usize, target: usize, sign: i8) -> Result<(), GraphError> {
        for node in [source, target] {
            if node >= self.n {
                return Err(GraphError::NodeOutOfRange { node, n: self.n });
            }
        }
        if source == target && !self.allow_self_loops {
            return Err(GraphError::SelfLoop(source));
        }
        assert!(sign == 1 || sign == -1, "edge sign must be ±1");
        if self.edge(source, target).is_some() {
            return Err(GraphError::DuplicateEdge(source, target));
        }
        self.edges.push(SignedEdge { source, target, sign });
        self.edges.sort_unstable();
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn edge(&self, source: usize, target: usize) -> Option<SignedEdge> {
        self.edges.iter().copied().find(|e| e.source == source && e.target == target)
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    /// Sign matrix with `S[target, source] = sign`, matching the weight convention.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            s[(e.target, e.source)] = e.sign as f64;
        }
        s
    }

    /// True when every edge of `self` appears in `other` with the same sign.
    pub fn is_subgraph_of(&self, other: &SignedGraph) -> bool {
        self.edges.iter().all(|e| other.edge(e.source, e.target) == Some(*e))
    }
}

/// Graph of a matrix: a nonzero `m_ij` becomes the edge `j → i` with sign of `m_ij`.
/// Diagonal entries become self-loops, which always count as cycles.
pub fn matrix_graph(m: &DMatrix<f64>) -> SignedGraph {
    let n = m.nrows();
    let mut g = SignedGraph::new(n, true);
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if v != 0.0 {
                g.add_edge(j, i, if v > 0.0 { 1 } else { -1 }).expect("unique entries");
            }
        }
    }
    g
}

fn find_cycle(g: &SignedGraph) -> Option<Vec<usize>> {
    let n = g.n;
    let mut succ = vec![Vec::new(); n];
    for e in &g.edges {
        succ[e.source].push(e.target);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(v: usize, succ: &[Vec<usize>], state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        state[v] = 1;
        stack.push(v);
        for &u in &succ[v] {
            if state[u] == 1 {
                let pos = stack.iter().position(|&s| s == u).expect("on stack");
                return Some(stack[pos..].to_vec());
            }
            if state[u] == 0 {
                if let Some(c) = dfs(u, succ, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }
    for v in 0..n {
        if state[v] == 0 {
            if let Some(c) = dfs(v, &succ, &mut state, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Kahn's algorithm, always releasing the smallest ready node first.
pub fn topological_order(g: &SignedGraph) -> Result<Vec<usize>, GraphError> {
    let n = g.n;
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for e in &g.edges {
        indeg[e.target] += 1;
        succ[e.source].push(e.target);
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &u in &succ[v] {
            indeg[u] -= 1;
            if indeg[u] == 0 {
                ready.push(Reverse(u));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(GraphError::CycleDetected { cycle: find_cycle(g).unwrap_or_default() })
    }
}

pub fn is_dag(g: &SignedGraph) -> bool {
    topological_order(g).is_ok()
}

/// Row/column reordering `Q` with `(QMQᵀ)_{ab} = M_{order[a], order[b]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub order: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { order: (0..n).collect() }
    }

    /// Position of original index `i` in the new ordering.
    pub fn position(&self, i: usize) -> usize {
        self.order.iter().position(|&v| v == i).expect("index in permutation")
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.order.len();
        let mut q = DMatrix::zeros(n, n);
        for (a, &i) in self.order.iter().enumerate() {
            q[(a, i)] = 1.0;
        }
        q
    }

    /// `Q M Q⁻¹`.
    pub fn apply(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.order.len();
        DMatrix::from_fn(n, n, |a, b| m[(self.order[a], self.order[b])])
    }

    /// `Q⁻¹ M Q`.
    pub fn unapply(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.order.len();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                out[(self.order[a], self.order[b])] = m[(a, b)];
            }
        }
        out
    }
}

/// Permutation that makes an acyclic pattern strictly lower-triangular.
pub fn permutation_to_qlt(delta: &DMatrix<f64>) -> Result<Permutation, GraphError> {
    if delta.nrows() != delta.ncols() {
        return Err(GraphError::DimensionMismatch { expected: delta.nrows(), found: delta.ncols() });
    }
    let order = topological_order(&matrix_graph(delta))?;
    Ok(Permutation { order })
}
