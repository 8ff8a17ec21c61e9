//! Scenario files: the network, its partition and frequencies, plus optional
//! vibrations, modification targets, and simulation settings.
//!
//! Node indices in scenario files and in every output are 1-based.

use graph_core::{
    build_incidence, select_spanning_tree, ClusterPartition, DirectedNetwork, IncidenceSet, TreeStrategy,
};
use kuramoto_dynamics::{KuramotoNetwork, VibrationEntry, VibrationSchedule};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The bundled two-cluster benchmark scenario.
pub const BENCHMARK_SCENARIO: &str = include_str!("../scenarios/two_cluster.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Nodes,
    pub edges: Vec<EdgeSpec>,
    pub partition: Vec<Vec<usize>>,
    pub omega: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    /// One modification matrix per cluster, in the cluster's tree coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nodes {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Directed edge `source → target` carrying weight `w_target,source`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Vibrations `(u/ε)·sin(β t/ε)` added to edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub epsilon: f64,
    pub entries: Vec<EntrySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub source: usize,
    pub target: usize,
    pub u: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Settle an uncontrolled run near the manifold and take its slowest direction.
    #[default]
    GrowingMode,
    /// Random direction in the intra-cluster coordinates.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSpec {
    /// Explicit initial phases; overrides `initial`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    pub seed: u64,
    /// Initial sync error for `growing_mode`, or `‖x‖` for `random`.
    pub perturbation: f64,
    pub initial: InitialKind,
    pub settle: f64,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Used for designed schedules and to override a given schedule's value.
    pub epsilon: f64,
    /// Ensemble size for the empirical classification.
    pub members: usize,
    pub sweep_members: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_t_end: Option<f64>,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            theta0: None,
            seed: 0,
            perturbation: 0.1,
            initial: InitialKind::GrowingMode,
            settle: 100.0,
            t_end: 250.0,
            dt: None,
            epsilon: 0.01,
            members: 10,
            sweep_members: 2,
            sweep_t_end: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSpec {
    /// Design tolerance factor on `max(max|Δ|, floor)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<f64>,
    /// Maximum relative change between averaging horizons `T` and `2T`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub averaging: Option<f64>,
}

/// A scenario turned into library objects.
#[derive(Debug, Clone)]
pub struct Built {
    pub kn: KuramotoNetwork,
    pub inc: IncidenceSet,
    pub schedule: Option<VibrationSchedule>,
    pub delta: Option<Vec<DMatrix<f64>>>,
}

/// Parses scenario JSON, reporting syntax and schema errors with their position.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("scenario line {}, column {}: {e}", e.line(), e.column())))
}

pub fn benchmark_scenario() -> Scenario {
    parse_scenario(BENCHMARK_SCENARIO).expect("bundled scenario is valid")
}

fn index(one_based: usize, n: usize, what: &str) -> Result<usize, CliError> {
    if one_based == 0 || one_based > n {
        return Err(CliError::Validation(format!("{what} {one_based} is not a node in 1..={n}")));
    }
    Ok(one_based - 1)
}

impl Scenario {
    /// Builds the network, spanning tree, and optional schedule and targets.
    pub fn build(&self, strategy: TreeStrategy) -> Result<Built, CliError> {
        let n = self.nodes.count;
        let invalid = |e: graph_core::GraphError| CliError::Validation(e.to_string());
        if let Some(labels) = &self.nodes.labels {
            if labels.len() != n {
                return Err(CliError::Validation(format!("{} labels for {n} nodes", labels.len())));
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Ok((index(e.source, n, "edge source")?, index(e.target, n, "edge target")?, e.weight)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let net = DirectedNetwork::new(n, edges).map_err(invalid)?;
        let clusters = self
            .partition
            .iter()
            .map(|c| c.iter().map(|&i| index(i, n, "partition entry")).collect())
            .collect::<Result<Vec<Vec<usize>>, CliError>>()?;
        let partition = ClusterPartition::new(n, clusters).map_err(invalid)?;
        let kn = KuramotoNetwork::new(net, self.omega.clone(), partition)?;
        let tree = select_spanning_tree(&kn.net, &kn.partition, strategy).map_err(invalid)?;
        let inc = build_incidence(&kn.net, &kn.partition, &tree).map_err(invalid)?;

        let schedule = match &self.schedule {
            Some(s) => {
                let entries = s
                    .entries
                    .iter()
                    .map(|e| {
                        Ok(VibrationEntry {
                            source: index(e.source, n, "vibration source")?,
                            target: index(e.target, n, "vibration target")?,
                            amplitude: e.u,
                            frequency: e.beta,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let sched = VibrationSchedule { epsilon: s.epsilon, entries, intra_only: true };
                sched.validate(&kn)?;
                Some(sched)
            }
            None => None,
        };

        let delta = match &self.delta {
            Some(blocks) => {
                if blocks.len() != kn.partition.r() {
                    return Err(CliError::Validation(format!(
                        "{} delta blocks for {} clusters",
                        blocks.len(),
                        kn.partition.r()
                    )));
                }
                let mut out = Vec::with_capacity(blocks.len());
                for (k, rows) in blocks.iter().enumerate() {
                    let d = kn.partition.cluster(k).len() - 1;
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(CliError::Validation(format!(
                            "delta block {} must be {d}x{d} for a cluster of {} nodes",
                            k + 1,
                            d + 1
                        )));
                    }
                    out.push(DMatrix::from_fn(d, d, |i, j| rows[i][j]));
                }
                Some(out)
            }
            None => None,
        };
        Ok(Built { kn, inc, schedule, delta })
    }
}

impl ScheduleSpec {
    /// Schedule in file form, with 1-based nodes.
    pub fn from_schedule(s: &VibrationSchedule) -> Self {
        Self {
            epsilon: s.epsilon,
            entries: s
                .entries
                .iter()
                .map(|e| EntrySpec { source: e.source + 1, target: e.target + 1, u: e.amplitude, beta: e.frequency })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kuramoto_dynamics::two_cluster_benchmark;
    use linalg::max_abs;

    #[test]
    fn bundled_scenario_is_the_benchmark_network() {
        let built = benchmark_scenario().build(TreeStrategy::MinDepth).unwrap();
        let reference = two_cluster_benchmark();
        assert!(max_abs(&(built.kn.net.adjacency() - reference.net.adjacency())) < 1e-15);
        assert_eq!(built.kn.omega, reference.omega);
        assert_eq!(built.kn.partition, reference.partition);
        assert!(built.schedule.is_none());
        assert_eq!(built.delta.unwrap().len(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let text = BENCHMARK_SCENARIO.replacen("\"omega\"", "\"omegas\"", 1);
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("line") && msg.contains("column") && msg.contains("omegas"), "{msg}");
    }

    #[test]
    fn zero_based_nodes_are_rejected() {
        let mut sc = benchmark_scenario();
        sc.edges[0].source = 0;
        assert_eq!(sc.build(TreeStrategy::MinDepth).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn wrong_delta_shape_is_rejected() {
        let mut sc = benchmark_scenario();
        sc.delta = Some(vec![vec![vec![0.0; 2]; 2], vec![vec![0.0; 3]; 3]]);
        assert_eq!(sc.build(TreeStrategy::MinDepth).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn schedule_round_trips_through_file_form() {
        let mut sc = benchmark_scenario();
        sc.schedule = Some(ScheduleSpec {
            epsilon: 0.01,
            entries: vec![EntrySpec { source: 2, target: 1, u: 1.5, beta: 2.0 }],
        });
        let built = sc.build(TreeStrategy::MinDepth).unwrap();
        let sched = built.schedule.unwrap();
        assert_eq!((sched.entries[0].source, sched.entries[0].target), (1, 0));
        assert_eq!(ScheduleSpec::from_schedule(&sched), sc.schedule.unwrap());
    }
}
