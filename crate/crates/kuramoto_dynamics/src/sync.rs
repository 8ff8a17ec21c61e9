use std::f64::consts::{PI, TAU};

use graph_core::ClusterPartition;

use crate::Trajectory;

/// Shortest arc length between two phases, in `[0, π]`.
pub fn geodesic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Largest intra-cluster pairwise geodesic distance; zero exactly on the manifold.
pub fn state_sync_error(theta: &[f64], partition: &ClusterPartition) -> f64 {
    let mut err = 0.0_f64;
    for c in partition.clusters() {
        for (a, &i) in c.iter().enumerate() {
            for &j in &c[a + 1..] {
                err = err.max(geodesic_distance(theta[i], theta[j]));
            }
        }
    }
    err
}

pub fn sync_error(traj: &Trajectory, partition: &ClusterPartition) -> Vec<f64> {
    traj.theta.iter().map(|th| state_sync_error(th, partition)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geodesic_examples() {
        assert!((geodesic_distance(0.0, PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((geodesic_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(geodesic_distance(1.3, 1.3), 0.0);
        assert!((geodesic_distance(0.0, 7.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn wrap_range() {
        for &x in &[-10.0, -PI, 0.0, PI, 3.5, 100.0] {
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI);
            assert!(geodesic_distance(w, x) < 1e-12);
        }
    }

    #[test]
    fn sync_error_examples() {
        let p = ClusterPartition::new(2, vec![vec![0, 1]]).unwrap();
        assert_eq!(state_sync_error(&[0.4, 0.4], &p), 0.0);
        assert!((state_sync_error(&[0.0, 0.2], &p) - 0.2).abs() < 1e-15);
    }
}
