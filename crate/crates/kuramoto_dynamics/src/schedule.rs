use std::f64::consts::TAU;

use graph_core::ClusterPartition;

use crate::{DynamicsError, KuramotoNetwork};

/// Sinusoidal vibration on one edge: `v(t) = (amplitude/ε)·sin(frequency·t/ε)`.
///
/// `amplitude` may be negative; that is a half-period phase shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationEntry {
    pub source: usize,
    pub target: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VibrationSchedule {
    pub epsilon: f64,
    pub entries: Vec<VibrationEntry>,
    /// When set, entries on inter-cluster edges are rejected.
    pub intra_only: bool,
}

impl VibrationSchedule {
    pub fn empty(epsilon: f64) -> Self {
        Self { epsilon, entries: Vec::new(), intra_only: true }
    }

    /// Checks the schedule against a network.
    pub fn validate(&self, kn: &KuramotoNetwork) -> Result<(), DynamicsError> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(DynamicsError::InvalidSchedule(format!("epsilon {} must be positive", self.epsilon)));
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if e.source >= kn.n() || e.target >= kn.n() || !kn.net.has_edge(e.source, e.target) {
                return Err(DynamicsError::InvalidSchedule(format!(
                    "no edge ({}, {}) to vibrate",
                    e.source, e.target
                )));
            }
            if !(e.frequency > 0.0) || !e.frequency.is_finite() || !e.amplitude.is_finite() {
                return Err(DynamicsError::InvalidSchedule(format!(
                    "edge ({}, {}) needs finite amplitude and positive frequency",
                    e.source, e.target
                )));
            }
            if self.intra_only && !kn.partition.same_cluster(e.source, e.target) {
                return Err(DynamicsError::InvalidSchedule(format!(
                    "edge ({}, {}) crosses clusters in an intra-only schedule",
                    e.source, e.target
                )));
            }
            if !seen.insert((e.source, e.target)) {
                return Err(DynamicsError::InvalidSchedule(format!(
                    "edge ({}, {}) listed twice",
                    e.source, e.target
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest fast-time frequency `β`, 0 when empty.
    pub fn max_frequency(&self) -> f64 {
        self.entries.iter().map(|e| e.frequency).fold(0.0, f64::max)
    }

    pub fn min_frequency(&self) -> f64 {
        let m = self.entries.iter().map(|e| e.frequency).fold(f64::INFINITY, f64::min);
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Shortest physical period `2πε/β_max`.
    pub fn shortest_period(&self) -> Option<f64> {
        let f = self.max_frequency();
        (f > 0.0).then(|| TAU * self.epsilon / f)
    }

    pub fn cluster_entries<'a>(
        &'a self,
        partition: &'a ClusterPartition,
        k: usize,
    ) -> impl Iterator<Item = &'a VibrationEntry> + 'a {
        self.entries.iter().filter(move |e| {
            partition.cluster_of(e.source) == k && partition.cluster_of(e.target) == k
        })
    }

    /// Zero inter-cluster vibration sums hold trivially for intra-only schedules.
    pub fn is_intra_only(&self, partition: &ClusterPartition) -> bool {
        self.entries.iter().all(|e| partition.same_cluster(e.source, e.target))
    }
}
