use graph_core::{permutation_to_qlt, GraphError, SignedGraph};
use nalgebra::DMatrix;

use crate::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModifiableMode {
    /// Only existing entries can carry a vibration.
    Linear,
    /// Zero entries count too: vibrations enter through the network edges,
    /// not through the Jacobian's own pattern.
    Kuramoto,
}

/// Signed graph of modifiable entries of `a`.
///
/// Entry `(p, q)` is the edge `q → p`. It is increasable (`+1`) when the
/// reverse entry `a_qp` is negative and decreasable (`−1`) when it is
/// positive; a zero reverse entry leaves it unmodifiable.
pub fn modifiable_graph(a: &DMatrix<f64>, mode: ModifiableMode) -> SignedGraph {
    let n = a.nrows();
    let mut g = SignedGraph::new(n, false);
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let reverse = a[(q, p)];
            let exists = mode == ModifiableMode::Kuramoto || a[(p, q)] != 0.0;
            if reverse != 0.0 && exists {
                let sign = if reverse < 0.0 { 1 } else { -1 };
                g.add_edge(q, p, sign).expect("edges are unique");
            }
        }
    }
    g
}

/// Checks `delta` against an allowed signed graph (a modifiable or realizable
/// graph): zero diagonal, every entry an allowed edge of the right sign, and
/// an acyclic pattern. Returns every violation found.
pub fn validate_modification(delta: &DMatrix<f64>, allowed: &SignedGraph) -> Vec<Violation> {
    let n = allowed.n();
    if delta.nrows() != n || delta.ncols() != n {
        return vec![Violation::ShapeMismatch { expected: n, found: delta.nrows() }];
    }
    let mut out = Vec::new();
    for i in 0..n {
        if delta[(i, i)] != 0.0 {
            out.push(Violation::DiagonalEntry { index: i });
        }
    }
    for p in 0..n {
        for q in 0..n {
            let d = delta[(p, q)];
            if p == q || d == 0.0 {
                continue;
            }
            match allowed.edge(q, p) {
                None => out.push(Violation::NotModifiable { row: p, col: q }),
                Some(e) if (e.sign > 0) != (d > 0.0) => {
                    out.push(Violation::SignMismatch { row: p, col: q, allowed: e.sign })
                }
                Some(_) => {}
            }
        }
    }
    let mut off = delta.clone();
    off.fill_diagonal(0.0);
    if let Err(GraphError::CycleDetected { cycle }) = permutation_to_qlt(&off) {
        out.push(Violation::Cycle { nodes: cycle });
    }
    out
}
