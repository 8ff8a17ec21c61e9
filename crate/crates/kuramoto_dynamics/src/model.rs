use graph_core::{check_clusters_strongly_connected, ClusterPartition, DirectedNetwork};

use crate::DynamicsError;

/// Network, natural frequencies and the target partition.
#[derive(Debug, Clone, PartialEq)]
pub struct KuramotoNetwork {
    pub net: DirectedNetwork,
    pub omega: Vec<f64>,
    pub partition: ClusterPartition,
}

impl KuramotoNetwork {
    pub fn new(
        net: DirectedNetwork,
        omega: Vec<f64>,
        partition: ClusterPartition,
    ) -> Result<Self, DynamicsError> {
        if omega.len() != net.n() {
            return Err(DynamicsError::InvalidModel(format!(
                "{} natural frequencies for {} nodes",
                omega.len(),
                net.n()
            )));
        }
        if let Some(i) = omega.iter().position(|w| !w.is_finite()) {
            return Err(DynamicsError::InvalidModel(format!("omega[{i}] is not finite")));
        }
        if partition.n() != net.n() {
            return Err(DynamicsError::InvalidModel(format!(
                "partition covers {} nodes, network has {}",
                partition.n(),
                net.n()
            )));
        }
        check_clusters_strongly_connected(&net, &partition)?;
        Ok(Self { net, omega, partition })
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }
}
