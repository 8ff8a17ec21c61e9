use graph_core::{
    build_incidence, check_invariance, is_dag, permutation_to_qlt,
    select_spanning_tree, topological_order, ClusterPartition, DirectedNetwork, GraphError,
    SignedGraph, TreeStrategy, ViolationKind, LEMMA_RESIDUAL_BOUND,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random connected network with `r` strongly connected clusters.
fn random_network(rng: &mut ChaCha8Rng, n: usize, r: usize) -> (DirectedNetwork, ClusterPartition) {
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    let mut sizes = vec![2usize; r];
    for _ in 0..n - 2 * r {
        sizes[rng.random_range(0..r)] += 1;
    }
    let mut clusters = Vec::new();
    let mut at = 0;
    for s in sizes {
        clusters.push(nodes[at..at + s].to_vec());
        at += s;
    }
    let mut w = DMatrix::<f64>::zeros(n, n);
    for c in &clusters {
        for k in 1..c.len() {
            let p = c[rng.random_range(0..k)];
            w[(c[k], p)] = rng.random_range(0.1..3.0);
            w[(p, c[k])] = rng.random_range(0.1..3.0);
        }
        for &a in c {
            for &b in c {
                if a != b && rng.random_bool(0.3) {
                    w[(a, b)] = rng.random_range(0.1..3.0);
                }
            }
        }
    }
    for k in 1..r {
        let a = clusters[k][rng.random_range(0..clusters[k].len())];
        let b = clusters[rng.random_range(0..k)][0];
        w[(a, b)] = rng.random_range(0.1..3.0);
        if rng.random_bool(0.5) {
            w[(b, a)] = rng.random_range(0.1..3.0);
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && w[(a, b)] == 0.0 && rng.random_bool(0.1) {
                w[(a, b)] = rng.random_range(0.1..3.0);
            }
        }
    }
    (
        DirectedNetwork::from_adjacency(&w).unwrap(),
        ClusterPartition::new(n, clusters).unwrap(),
    )
}

#[test]
fn transfer_identity_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let r = 1 + case % 3;
        let n = rng.random_range(2 * r..=12);
        let (net, part) = random_network(&mut rng, n, r);
        for strategy in [TreeStrategy::MinDepth, TreeStrategy::FirstFound] {
            let tree = select_spanning_tree(&net, &part, strategy).unwrap();
            let inc = build_incidence(&net, &part, &tree).unwrap();
            assert!(inc.lemma_residual() < LEMMA_RESIDUAL_BOUND, "case {case} {strategy}");
            assert_eq!(inc.n_intra_tree(), n - r);
            let bh = inc.b_hat.clone();
            assert_eq!(bh.clone().svd(false, false).rank(1e-9), n - 1);
            // Block-diagonal intra tree incidence.
            let bhi = inc.b_hat_intra();
            for k in 0..r {
                for c in inc.cluster_tree_range(k) {
                    for v in 0..n {
                        if bhi[(v, c)] != 0.0 {
                            assert_eq!(part.cluster_of(v), k);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn hub_tree_of_four_node_cluster() {
    // Weights in units of 0.05; the pair {2,4} (1-based) is not connected.
    let a = 0.05;
    let w = DMatrix::from_row_slice(
        4,
        4,
        &[0.0, 1.0, 2.0, 3.0, 1.0, 0.0, 2.0, 0.0, 2.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0, 0.0],
    ) * a;
    let net = DirectedNetwork::from_adjacency(&w).unwrap();
    let part = ClusterPartition::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
    let tree = select_spanning_tree(&net, &part, TreeStrategy::MinDepth).unwrap();
    assert_eq!(tree, vec![(2, 0), (2, 1), (2, 3)]);
    let inc = build_incidence(&net, &part, &tree).unwrap();
    assert_eq!(inc.b_hat.ncols(), 3);
    for c in 0..3 {
        assert_eq!(inc.b_hat[(2, c)], -1.0);
        assert_eq!(inc.b_hat.column(c).iter().filter(|&&v| v == 1.0).count(), 1);
    }
}

#[test]
fn invariance_examples() {
    let w = DMatrix::from_row_slice(
        4,
        4,
        &[0.0, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0, 1.0, 0.0, 2.0, 1.0, 0.0],
    );
    let net = DirectedNetwork::from_adjacency(&w).unwrap();
    let part = ClusterPartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
    let ok = check_invariance(&net, &part, &[1.0, 1.0, 5.0, 5.0]).unwrap();
    assert!(ok.holds, "{:?}", ok.violations);
    let bad = check_invariance(&net, &part, &[1.0, 1.1, 5.0, 5.0]).unwrap();
    assert!(!bad.holds);
    assert_eq!(bad.violations[0].kind, ViolationKind::Frequency);
    assert_eq!((bad.violations[0].i, bad.violations[0].j), (0, 1));

    // Two disconnected clusters: coupling sums vacuously balanced.
    let w2 = DMatrix::from_row_slice(
        4,
        4,
        &[0.0, 1.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0, 0.0],
    );
    let net2 = DirectedNetwork::from_adjacency(&w2).unwrap();
    assert!(check_invariance(&net2, &part, &[0.3, 0.3, -1.0, -1.0]).unwrap().holds);

    let mut w3 = w.clone();
    w3[(0, 2)] = 2.5;
    let net3 = DirectedNetwork::from_adjacency(&w3).unwrap();
    let rep = check_invariance(&net3, &part, &[1.0, 1.0, 5.0, 5.0]).unwrap();
    assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::Coupling && v.other_cluster == 1));
}

#[test]
fn cyclic_pattern_has_no_qlt_form() {
    let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    assert!(matches!(permutation_to_qlt(&d), Err(GraphError::CycleDetected { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariance_verdict_is_permutation_equivariant(seed in any::<u64>(), balanced in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        // Two clusters {0,1,2} and {3,4,5}; inter weights either balanced or random.
        let mut w = DMatrix::<f64>::zeros(n, n);
        for &(a, b) in &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)] {
            w[(a, b)] = rng.random_range(0.5..2.0);
            w[(b, a)] = rng.random_range(0.5..2.0);
        }
        for i in 0..3 {
            let q = 3 + i;
            let g = if balanced { 1.5 } else { rng.random_range(0.5..2.0) };
            w[(i, q)] = g;
            w[(q, i)] = g;
        }
        let omega = [1.0, 1.0, 1.0, 4.0, 4.0, 4.0];
        let net = DirectedNetwork::from_adjacency(&w).unwrap();
        let part = ClusterPartition::new(n, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let verdict = check_invariance(&net, &part, &omega).unwrap().holds;

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let wp = DMatrix::from_fn(n, n, |i, j| {
            let (oi, oj) = (perm.iter().position(|&p| p == i).unwrap(), perm.iter().position(|&p| p == j).unwrap());
            w[(oi, oj)]
        });
        let omega_p: Vec<f64> = (0..n).map(|i| omega[perm.iter().position(|&p| p == i).unwrap()]).collect();
        let clusters_p = vec![
            (0..3).map(|i| perm[i]).collect::<Vec<_>>(),
            (3..6).map(|i| perm[i]).collect::<Vec<_>>(),
        ];
        let net_p = DirectedNetwork::from_adjacency(&wp).unwrap();
        let part_p = ClusterPartition::new(n, clusters_p).unwrap();
        prop_assert_eq!(verdict, check_invariance(&net_p, &part_p, &omega_p).unwrap().holds);
        if balanced { prop_assert!(verdict); }
    }

    #[test]
    fn topological_order_gives_lower_triangular_adjacency(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Random DAG: edges only from lower to higher rank in a hidden order.
        let mut hidden: Vec<usize> = (0..n).collect();
        hidden.shuffle(&mut rng);
        let mut g = SignedGraph::new(n, false);
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.4) {
                    g.add_edge(hidden[a], hidden[b], if rng.random_bool(0.5) { 1 } else { -1 }).unwrap();
                }
            }
        }
        prop_assert!(is_dag(&g));
        let order = topological_order(&g).unwrap();
        let s = g.adjacency();
        let pos = |v: usize| order.iter().position(|&o| o == v).unwrap();
        for e in g.edges() {
            prop_assert!(pos(e.source) < pos(e.target));
        }
        // Reordered sign matrix S[target, source] is strictly lower-triangular.
        for i in 0..n {
            for j in i..n {
                prop_assert_eq!(s[(order[i], order[j])], 0.0);
            }
        }
    }
}
