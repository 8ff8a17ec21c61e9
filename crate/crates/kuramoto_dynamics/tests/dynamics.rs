use graph_core::{build_incidence, select_spanning_tree, ClusterPartition, DirectedNetwork, IncidenceSet, TreeStrategy};
use kuramoto_dynamics::*;
use linalg::max_abs;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn benchmark_incidence(kn: &KuramotoNetwork) -> IncidenceSet {
    let tree = select_spanning_tree(&kn.net, &kn.partition, TreeStrategy::MinDepth).unwrap();
    build_incidence(&kn.net, &kn.partition, &tree).unwrap()
}

fn two_node() -> KuramotoNetwork {
    let net = DirectedNetwork::new(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let partition = ClusterPartition::new(2, vec![vec![0, 1]]).unwrap();
    KuramotoNetwork::new(net, vec![0.5, 0.5], partition).unwrap()
}

#[test]
fn benchmark_tree_is_the_hub_and_ring_tree() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    assert_eq!(inc.tree, vec![(2, 0), (2, 1), (2, 3), (4, 5), (4, 7), (7, 6), (0, 6)]);
}

#[test]
fn benchmark_jacobian_blocks() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    let lin = linearize(&kn, &inc).unwrap();
    let j1 = DMatrix::from_row_slice(3, 3, &[-8.0, 0.0, 2.0, -1.0, -4.0, -1.0, 1.0, -1.0, -5.0]) * BENCHMARK_ALPHA;
    let j2 = DMatrix::from_row_slice(3, 3, &[-3.0, 0.0, 1.0, -1.0, -2.0, 1.0, 1.0, 0.0, -3.0]);
    assert!(max_abs(&(&lin.blocks[0] - j1)) < 1e-12, "{}", lin.blocks[0]);
    assert!(max_abs(&(&lin.blocks[1] - j2)) < 1e-12, "{}", lin.blocks[1]);
    assert_eq!(lin.full.shape(), (6, 6));
    assert!(max_abs(&lin.full.view((0, 3), (3, 3)).clone_owned()) == 0.0);
}

#[test]
fn two_node_jacobian_is_minus_two() {
    let kn = two_node();
    let tree = select_spanning_tree(&kn.net, &kn.partition, TreeStrategy::MinDepth).unwrap();
    let inc = build_incidence(&kn.net, &kn.partition, &tree).unwrap();
    let lin = linearize(&kn, &inc).unwrap();
    assert_eq!(lin.full.shape(), (1, 1));
    assert!((lin.full[(0, 0)] + 2.0).abs() < 1e-14);
}

#[test]
fn linearize_rejects_non_invariant_partition() {
    let mut kn = two_cluster_benchmark();
    kn.omega[1] = 1.5;
    let inc = benchmark_incidence(&kn);
    assert!(matches!(linearize(&kn, &inc), Err(DynamicsError::InvarianceViolated(_))));
}

#[test]
fn finite_difference_jacobian_matches_j_plus_n() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    let lin = linearize(&kn, &inc).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let y = DVector::from_fn(1, |_, _| rng.random_range(-3.0..3.0));
        let d = inc.n_intra_tree();
        let h = 1e-5;
        let mut fd = DMatrix::zeros(d, d);
        for c in 0..d {
            let mut xp = DVector::zeros(d);
            xp[c] = h;
            let xm = -xp.clone();
            let col = (incremental_field(&kn, &inc, &xp, &y) - incremental_field(&kn, &inc, &xm, &y)) / (2.0 * h);
            fd.set_column(c, &col);
        }
        let analytic = &lin.full + lin.inter.eval(&y);
        assert!(max_abs(&(fd - analytic)) < 1e-6);
    }
}

#[test]
fn envelope_dominates_sampled_inter_jacobian() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    let lin = linearize(&kn, &inc).unwrap();
    let env = lin.inter.envelope();
    let bounds = perturbation_bounds(&kn, &inc, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let y = DVector::from_fn(1, |_, _| rng.random_range(-10.0..10.0));
        let n = lin.inter.eval(&y);
        assert!(n.iter().zip(env.iter()).all(|(a, b)| a.abs() <= b + 1e-12));
        for k in 0..2 {
            for l in 0..2 {
                let block = Linearization::block_of(&inc, &n, k, l);
                let norm = block.singular_values().max();
                assert!(norm <= bounds.c_blocks[(k, l)] + 1e-12);
            }
        }
    }
}

#[test]
fn bounds_without_control_use_unit_factor() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    let b = perturbation_bounds(&kn, &inc, None).unwrap();
    assert_eq!(b.c, 1.0);
    assert_eq!(b.gamma, b.c_blocks);
    assert!(b.gamma.iter().all(|v| v.is_finite() && *v >= 0.0));
}

#[test]
fn bounds_vanish_without_inter_edges() {
    let net = DirectedNetwork::new(2, [(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
    let partition = ClusterPartition::new(2, vec![vec![0, 1]]).unwrap();
    let kn = KuramotoNetwork::new(net, vec![0.0, 0.0], partition).unwrap();
    let tree = select_spanning_tree(&kn.net, &kn.partition, TreeStrategy::MinDepth).unwrap();
    let inc = build_incidence(&kn.net, &kn.partition, &tree).unwrap();
    let b = perturbation_bounds(&kn, &inc, None).unwrap();
    assert!(b.gamma.iter().all(|v| *v == 0.0));
}

#[test]
fn controlled_bounds_exceed_uncontrolled() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    let sched = VibrationSchedule {
        epsilon: 0.01,
        entries: vec![VibrationEntry { source: 1, target: 0, amplitude: 1.0, frequency: 1.0 }],
        intra_only: true,
    };
    let b = perturbation_bounds(&kn, &inc, Some(&sched)).unwrap();
    assert!(b.c >= BOUND_SAFETY_FACTOR);
    assert!(b.c.is_finite());
}

#[test]
fn two_identical_oscillators_synchronize() {
    let kn = two_node();
    let traj = simulate(&kn, None, &[0.0, 0.1], 10.0, None).unwrap();
    let err = sync_error(&traj, &kn.partition);
    assert!((err[0] - 0.1).abs() < 1e-15);
    assert!(err.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(*err.last().unwrap() < 1e-8);
}

#[test]
fn invariance_on_manifold_over_100_time_units() {
    let kn = two_cluster_benchmark();
    let theta0 = seeded_manifold_state(&kn, 5);
    let traj = simulate(&kn, None, &theta0, 100.0, None).unwrap();
    let worst = sync_error(&traj, &kn.partition).into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn invariance_with_balanced_intra_vibration() {
    let kn = two_cluster_benchmark();
    let theta0 = seeded_manifold_state(&kn, 6);
    let sched = VibrationSchedule {
        epsilon: 0.1,
        entries: vec![
            VibrationEntry { source: 1, target: 0, amplitude: 0.3, frequency: 1.0 },
            VibrationEntry { source: 5, target: 4, amplitude: -0.2, frequency: 2f64.sqrt() },
        ],
        intra_only: true,
    };
    let traj = simulate(&kn, Some(&sched), &theta0, 20.0, None).unwrap();
    let worst = sync_error(&traj, &kn.partition).into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn halving_dt_changes_final_state_little() {
    let kn = two_cluster_benchmark();
    let inc = benchmark_incidence(&kn);
    let base = seeded_manifold_state(&kn, 9);
    let theta0 = &perturbed_initial_states(&inc, &base, 1, 0.1, 2)[0];
    let dt = default_dt(&kn, None);
    let a = simulate(&kn, None, theta0, 20.0, Some(dt)).unwrap();
    let b = simulate(&kn, None, theta0, 20.0, Some(dt / 2.0)).unwrap();
    let diff = a.last().iter().zip(b.last()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn coarse_step_is_rejected() {
    let kn = two_cluster_benchmark();
    let sched = VibrationSchedule {
        epsilon: 0.01,
        entries: vec![VibrationEntry { source: 1, target: 0, amplitude: 1.0, frequency: 1.0 }],
        intra_only: true,
    };
    let theta0 = vec![0.0; 8];
    let r = simulate(&kn, Some(&sched), &theta0, 1.0, Some(0.01));
    assert!(matches!(r, Err(DynamicsError::StepTooCoarse { .. })));
}

#[test]
fn schedule_on_missing_or_inter_edge_rejected() {
    let kn = two_cluster_benchmark();
    let mut sched = VibrationSchedule {
        epsilon: 0.01,
        entries: vec![VibrationEntry { source: 4, target: 6, amplitude: 1.0, frequency: 1.0 }],
        intra_only: true,
    };
    assert!(sched.validate(&kn).is_err());
    sched.entries[0] = VibrationEntry { source: 0, target: 6, amplitude: 1.0, frequency: 1.0 };
    assert!(sched.validate(&kn).is_err());
    sched.intra_only = false;
    assert!(sched.validate(&kn).is_ok());
}

#[test]
fn zero_horizon_gives_single_sample() {
    let kn = two_node();
    let traj = simulate(&kn, None, &[0.0, 0.3], 0.0, None).unwrap();
    assert_eq!(traj.len(), 1);
    let mut buf = Vec::new();
    traj.write_csv(&mut buf, &kn.partition).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "t,theta_1,theta_2,err");
    assert_eq!(lines.len(), 2);
}

#[test]
fn uncontrolled_benchmark_does_not_resynchronize() {
    let kn = two_cluster_benchmark();
    let base = seeded_manifold_state(&kn, 1);
    let theta0 = growing_mode_perturbation(&kn, &base, 0.1, 300.0, 1).unwrap();
    let e0 = state_sync_error(&theta0, &kn.partition);
    assert!((e0 - 0.1).abs() < 1e-9);
    let traj = simulate(&kn, None, &theta0, 100.0, None).unwrap();
    let min = sync_error(&traj, &kn.partition).into_iter().fold(f64::INFINITY, f64::min);
    assert!(min > 0.05, "{min}");
}

#[test]
fn vibrated_edge_gain_matches_forcing_entry() {
    // The two-node cluster's forcing is scalar and diagonal.
    let kn = two_node();
    let tree = select_spanning_tree(&kn.net, &kn.partition, TreeStrategy::MinDepth).unwrap();
    let inc = build_incidence(&kn.net, &kn.partition, &tree).unwrap();
    let maps = influence_matrices(&inc, 0);
    assert_eq!(maps.len(), 2);
    for (_, m) in &maps {
        assert_eq!(m.shape(), (1, 1));
        assert!((m[(0, 0)] + 1.0).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn frequency_shift_leaves_x_unchanged(shift in -5.0f64..5.0, seed in 0u64..1000) {
        let kn = two_cluster_benchmark();
        let inc = benchmark_incidence(&kn);
        let base = seeded_manifold_state(&kn, seed);
        let theta0 = perturbed_initial_states(&inc, &base, 1, 0.1, seed)[0].clone();
        let mut shifted = kn.clone();
        for w in &mut shifted.omega {
            *w += shift;
        }
        let dt = default_dt(&kn, None).min(default_dt(&shifted, None));
        let a = simulate(&kn, None, &theta0, 5.0, Some(dt)).unwrap();
        let b = simulate(&shifted, None, &theta0, 5.0, Some(dt)).unwrap();
        for ((xa, _), (xb, _)) in a.coordinates(&inc).iter().zip(b.coordinates(&inc).iter()) {
            prop_assert!((xa - xb).amax() < 1e-8);
        }
    }
}
