use graph_core::{ClusterPartition, DirectedNetwork};

use crate::KuramotoNetwork;

/// Weight unit of the first cluster's couplings.
pub const BENCHMARK_ALPHA: f64 = 0.05;

/// Two-cluster, eight-node benchmark network.
///
/// Cluster 0 is nodes 0..4 with weak asymmetric couplings (multiples of
/// [`BENCHMARK_ALPHA`]) and natural frequency 1. Cluster 1 is the unit ring
/// 4–5–6–7 with natural frequency 10. Every node has inter-cluster row sum 4,
/// split into a weight-3 and a weight-1 symmetric link, so the partition is
/// flow-invariant.
pub fn two_cluster_benchmark() -> KuramotoNetwork {
    let a = BENCHMARK_ALPHA;
    // (i, j, w_ij): weight of the edge j → i.
    let weak: [(usize, usize, f64); 10] = [
        (0, 1, 1.0),
        (0, 2, 2.0),
        (0, 3, 3.0),
        (1, 0, 1.0),
        (1, 2, 2.0),
        (2, 0, 2.0),
        (2, 1, 1.0),
        (2, 3, 1.0),
        (3, 0, 3.0),
        (3, 2, 1.0),
    ];
    let mut edges: Vec<(usize, usize, f64)> = weak.iter().map(|&(i, j, w)| (j, i, w * a)).collect();
    for (p, q) in [(4, 5), (5, 6), (6, 7), (7, 4)] {
        edges.push((p, q, 1.0));
        edges.push((q, p, 1.0));
    }
    for (p, q, w) in [
        (0, 6, 3.0),
        (1, 5, 3.0),
        (2, 7, 3.0),
        (3, 4, 3.0),
        (0, 7, 1.0),
        (1, 4, 1.0),
        (2, 6, 1.0),
        (3, 5, 1.0),
    ] {
        edges.push((p, q, w));
        edges.push((q, p, w));
    }
    let net = DirectedNetwork::new(8, edges).expect("benchmark edges are valid");
    let partition =
        ClusterPartition::new(8, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).expect("valid partition");
    let omega = vec![1.0, 1.0, 1.0, 1.0, 10.0, 10.0, 10.0, 10.0];
    KuramotoNetwork::new(net, omega, partition).expect("benchmark is consistent")
}
