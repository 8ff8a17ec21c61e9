use crate::{ClusterPartition, DirectedNetwork, GraphError};

/// Absolute tolerance on frequency and coupling-sum mismatches.
const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Unequal natural frequencies inside a cluster.
    Frequency,
    /// Unequal total coupling from some cluster `ℓ` into two nodes of cluster `k`.
    Coupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceViolation {
    pub kind: ViolationKind,
    pub cluster: usize,
    /// Source cluster `ℓ` for coupling violations; equals `cluster` for frequency ones.
    pub other_cluster: usize,
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub holds: bool,
    pub violations: Vec<InvarianceViolation>,
}

/// Checks that the cluster synchronization manifold is flow-invariant:
/// equal frequencies inside each cluster and, for every other cluster `ℓ`,
/// equal row sums `Σ_{q∈P_ℓ} w_iq` across the nodes `i` of cluster `k`.
pub fn check_invariance(
    net: &DirectedNetwork,
    partition: &ClusterPartition,
    omega: &[f64],
) -> Result<InvarianceReport, GraphError> {
    if omega.len() != net.n() {
        return Err(GraphError::DimensionMismatch { expected: net.n(), found: omega.len() });
    }
    if partition.n() != net.n() {
        return Err(GraphError::DimensionMismatch { expected: net.n(), found: partition.n() });
    }
    let scale = net.adjacency().iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let mut violations = Vec::new();
    for (k, ck) in partition.clusters().iter().enumerate() {
        for (a, &i) in ck.iter().enumerate() {
            for &j in &ck[a + 1..] {
                let d = omega[i] - omega[j];
                if d.abs() > TOLERANCE * omega[i].abs().max(1.0) {
                    violations.push(InvarianceViolation {
                        kind: ViolationKind::Frequency,
                        cluster: k,
                        other_cluster: k,
                        i,
                        j,
                        residual: d,
                    });
                }
                for (l, cl) in partition.clusters().iter().enumerate() {
                    if l == k {
                        continue;
                    }
                    let d: f64 = cl.iter().map(|&q| net.weight(i, q) - net.weight(j, q)).sum();
                    if d.abs() > TOLERANCE * scale {
                        violations.push(InvarianceViolation {
                            kind: ViolationKind::Coupling,
                            cluster: k,
                            other_cluster: l,
                            i,
                            j,
                            residual: d,
                        });
                    }
                }
            }
        }
    }
    Ok(InvarianceReport { holds: violations.is_empty(), violations })
}
