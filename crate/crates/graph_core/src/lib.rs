//! Graph-side data and algebra for cluster synchronization analysis.
//!
//! Node indices are 0-based throughout. An edge `(j, i)` points from `j` to
//! `i` and its weight is the adjacency entry `w_ij`, the influence of `j` on
//! `i`.

mod dag;
mod error;
mod incidence;
mod invariance;
mod network;
mod tree;

pub use dag::{is_dag, matrix_graph, permutation_to_qlt, topological_order, Permutation, SignedEdge, SignedGraph};
pub use error::GraphError;
pub use incidence::{build_incidence, IncidenceSet, LEMMA_RESIDUAL_BOUND};
pub use invariance::{check_invariance, InvarianceReport, InvarianceViolation, ViolationKind};
pub use network::{check_clusters_strongly_connected, ClusterPartition, DirectedNetwork, Edge};
pub use tree::{select_spanning_tree, tree_depth, TreeStrategy};
