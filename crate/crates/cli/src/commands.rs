use graph_core::{check_invariance, TreeStrategy};
use kuramoto_dynamics::{
    geodesic_distance, growing_mode_perturbation, linearize, perturbed_initial_states, seeded_manifold_state,
    simulate as integrate, state_sync_error, ClassifierOptions, KuramotoNetwork, Trajectory, VibrationSchedule,
};
use linalg::{max_real_eigenvalue, robustness, AverageOptions};
use nalgebra::DMatrix;
use serde::Serialize;
use stability_cert::{certify as run_certify, to_rows, CertifyOptions, EmpiricalOptions, StabilityReport};
use vib_design::{design_cluster, influence_map, validate_modification, ClusterDesign, DesignError, DesignOptions, Violation};

use crate::output::Artifact;
use crate::plot::simulation_script;
use crate::scenario::{Built, Scenario, ScheduleSpec};
use crate::CliError;

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub tree: TreeStrategy,
    /// Simulate or certify without any vibration.
    pub uncontrolled: bool,
}

impl Overrides {
    /// Scenario with the overrides folded in.
    pub fn apply(&self, sc: &Scenario) -> Scenario {
        let mut sc = sc.clone();
        if let Some(eps) = self.epsilon {
            sc.simulation.epsilon = eps;
            if let Some(s) = &mut sc.schedule {
                s.epsilon = eps;
            }
        }
        if let Some(seed) = self.seed {
            sc.simulation.seed = seed;
        }
        if let Some(t) = self.tolerance {
            sc.tolerances.design = Some(t);
        }
        if self.uncontrolled {
            sc.schedule = None;
            sc.delta = None;
        }
        sc
    }
}

fn design_options(sc: &Scenario) -> DesignOptions {
    let mut opts = DesignOptions::default();
    if let Some(t) = sc.tolerances.design {
        opts.tolerance_factor = t;
    }
    opts.averaging = averaging_options(sc);
    opts
}

fn averaging_options(sc: &Scenario) -> AverageOptions {
    let mut a = AverageOptions::default();
    if let Some(t) = sc.tolerances.averaging {
        a.relative_tolerance = t;
    }
    a
}

fn one_based_pairs(pairs: &[(usize, usize)]) -> Vec<[usize; 2]> {
    pairs.iter().map(|&(a, b)| [a + 1, b + 1]).collect()
}

fn describe(v: &Violation) -> String {
    match v {
        Violation::ShapeMismatch { expected, found } => format!("expected a {expected}x{expected} matrix, found {found} rows"),
        Violation::DiagonalEntry { index } => format!("diagonal entry ({0}, {0}) is nonzero", index + 1),
        Violation::NotModifiable { row, col } => format!("entry ({}, {}) cannot be modified", row + 1, col + 1),
        Violation::SignMismatch { row, col, allowed } => format!(
            "entry ({}, {}) can only be {}",
            row + 1,
            col + 1,
            if *allowed > 0 { "increased" } else { "decreased" }
        ),
        Violation::Cycle { nodes } => {
            let nodes: Vec<usize> = nodes.iter().map(|i| i + 1).collect();
            format!("modification pattern has a cycle through {nodes:?}")
        }
    }
}

fn design_error(e: DesignError) -> CliError {
    match e {
        DesignError::Violations(v) => {
            CliError::NotRealizable(v.iter().map(describe).collect::<Vec<_>>().join("; "))
        }
        DesignError::NoRealizableEdges { cluster } => {
            CliError::NotRealizable(format!("cluster {} has no realizable modification", cluster + 1))
        }
        e => e.into(),
    }
}

fn has_design(delta: &Option<Vec<DMatrix<f64>>>) -> bool {
    delta.as_ref().is_some_and(|d| d.iter().any(|m| m.iter().any(|v| *v != 0.0)))
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedPosition {
    pub row: usize,
    pub col: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComboEdge {
    pub source: usize,
    pub target: usize,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComboOut {
    pub row: usize,
    pub col: usize,
    pub edges: Vec<ComboEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterAnalysis {
    pub index: usize,
    pub nodes: Vec<usize>,
    pub tree_edges: Vec<[usize; 2]>,
    pub jacobian: Vec<Vec<f64>>,
    pub max_real_eigenvalue: f64,
    pub robustness: Option<f64>,
    pub modifiable: Vec<SignedPosition>,
    pub realizable: Vec<SignedPosition>,
    pub combos: Vec<ComboOut>,
    pub maximal_acyclic: Vec<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceSection {
    pub holds: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCheck {
    pub index: usize,
    pub realizable: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub tree_strategy: String,
    pub tree: Vec<[usize; 2]>,
    pub invariance: InvarianceSection,
    pub clusters: Vec<ClusterAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<Vec<DeltaCheck>>,
}

fn positions(g: &graph_core::SignedGraph) -> Vec<SignedPosition> {
    let mut v: Vec<SignedPosition> =
        g.edges().iter().map(|e| SignedPosition { row: e.target + 1, col: e.source + 1, sign: e.sign }).collect();
    v.sort_by_key(|p| (p.row, p.col));
    v
}

/// Linearization, robustness, and modifiable graphs of every cluster.
pub fn analyze(scenario: &Scenario, ov: &Overrides) -> Result<(AnalyzeReport, Vec<Artifact>), CliError> {
    let sc = ov.apply(scenario);
    let Built { kn, inc, delta, .. } = sc.build(ov.tree)?;
    let inv = check_invariance(&kn.net, &kn.partition, &kn.omega).map_err(|e| CliError::Validation(e.to_string()))?;
    if !inv.holds {
        let list: Vec<String> = inv
            .violations
            .iter()
            .map(|v| format!("{:?} in cluster {} at nodes {} and {}", v.kind, v.cluster + 1, v.i + 1, v.j + 1))
            .collect();
        return Err(CliError::Validation(format!("partition is not invariant: {}", list.join("; "))));
    }
    let lin = linearize(&kn, &inc)?;
    let mut clusters = Vec::with_capacity(lin.blocks.len());
    let mut maps = Vec::with_capacity(lin.blocks.len());
    for (k, jac) in lin.blocks.iter().enumerate() {
        let map = influence_map(jac, kuramoto_dynamics::influence_matrices(&inc, k));
        let combos = map
            .combos
            .iter()
            .map(|c| ComboOut {
                row: c.position.0 + 1,
                col: c.position.1 + 1,
                edges: c
                    .edges
                    .iter()
                    .map(|&((s, t), coefficient)| ComboEdge { source: s + 1, target: t + 1, coefficient })
                    .collect(),
            })
            .collect();
        let tree_edges: Vec<(usize, usize)> = inc.cluster_tree_range(k).map(|i| inc.tree[i]).collect();
        clusters.push(ClusterAnalysis {
            index: k + 1,
            nodes: kn.partition.cluster(k).iter().map(|i| i + 1).collect(),
            tree_edges: one_based_pairs(&tree_edges),
            jacobian: to_rows(jac),
            max_real_eigenvalue: max_real_eigenvalue(jac).map_err(|e| CliError::Compute(e.to_string()))?,
            robustness: robustness(jac).ok().map(|r| r.value),
            modifiable: positions(&map.modifiable),
            realizable: positions(&map.realizable),
            combos,
            maximal_acyclic: map.maximal_acyclic.iter().map(|s| one_based_pairs(s)).collect(),
        });
        maps.push(map);
    }
    let design = if has_design(&delta) {
        let delta = delta.expect("checked");
        Some(
            delta
                .iter()
                .zip(&maps)
                .enumerate()
                .map(|(k, (d, map))| {
                    let violations: Vec<String> = if d.iter().all(|v| *v == 0.0) {
                        Vec::new()
                    } else {
                        validate_modification(d, &map.realizable).iter().map(describe).collect()
                    };
                    DeltaCheck { index: k + 1, realizable: violations.is_empty(), violations }
                })
                .collect(),
        )
    } else {
        None
    };
    let report = AnalyzeReport {
        name: sc.name.clone(),
        tree_strategy: ov.tree.to_string(),
        tree: one_based_pairs(&inc.tree),
        invariance: InvarianceSection { holds: true, violations: Vec::new() },
        clusters,
        design,
    };
    let artifact = Artifact::json("report.json", &report)?;
    Ok((report, vec![artifact]))
}

// ---------------------------------------------------------------- design

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotEdge {
    pub source: usize,
    pub target: usize,
    pub coefficient: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotOut {
    pub row: usize,
    pub col: usize,
    pub level: usize,
    /// Amplitude to frequency ratio `u/β` of the combined vibration.
    pub ratio: f64,
    pub beta: f64,
    pub pool_value: u64,
    pub edges: Vec<SlotEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDesignOut {
    pub index: usize,
    pub delta: Vec<Vec<f64>>,
    pub target: Vec<Vec<f64>>,
    pub target_robustness: Option<f64>,
    pub averaged: Option<Vec<Vec<f64>>>,
    pub residual: f64,
    pub tolerance: f64,
    pub rho: f64,
    pub slots: Vec<SlotOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateOut {
    pub c_factor: f64,
    pub c_blocks: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub s: Option<Vec<Vec<f64>>>,
    pub m_matrix: bool,
    pub hurwitz: Vec<bool>,
    pub robustness: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub schedule: ScheduleSpec,
    pub clusters: Vec<ClusterDesignOut>,
    pub certificate: CertificateOut,
}

/// Runs the cluster design of a scenario with its `delta` blocks.
pub fn design_scenario(sc: &Scenario, built: &Built) -> Result<ClusterDesign, CliError> {
    let delta = built
        .delta
        .as_ref()
        .ok_or_else(|| CliError::Validation("scenario has no delta blocks to design for".into()))?;
    design_cluster(&built.kn, &built.inc, delta, sc.simulation.epsilon, &design_options(sc)).map_err(design_error)
}

fn design_report(d: &ClusterDesign) -> DesignReport {
    let clusters = d
        .outcomes
        .iter()
        .map(|o| ClusterDesignOut {
            index: o.cluster + 1,
            delta: to_rows(&o.delta),
            target: to_rows(&o.target),
            target_robustness: d.certificate.s.robustness[o.cluster].as_ref().map(|r| r.value),
            averaged: o.averaged.as_ref().map(|a| to_rows(&a.jbar)),
            residual: o.residual,
            tolerance: o.tolerance,
            rho: o.rho,
            slots: o
                .slots
                .iter()
                .zip(&o.combos)
                .map(|(s, c)| SlotOut {
                    row: s.row + 1,
                    col: s.col + 1,
                    level: s.level,
                    ratio: s.ratio,
                    beta: s.frequency,
                    pool_value: s.pool_value,
                    edges: c
                        .edges
                        .iter()
                        .map(|&((src, tgt), coefficient)| SlotEdge {
                            source: src + 1,
                            target: tgt + 1,
                            coefficient,
                            u: coefficient * s.amplitude,
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let c = &d.certificate;
    DesignReport {
        schedule: ScheduleSpec::from_schedule(&d.schedule),
        clusters,
        certificate: CertificateOut {
            c_factor: c.bounds.c,
            c_blocks: to_rows(&c.bounds.c_blocks),
            gamma: to_rows(&c.bounds.gamma),
            s: c.s.s.as_ref().map(to_rows),
            m_matrix: c.s.m_matrix,
            hurwitz: c.s.hurwitz.clone(),
            robustness: c.s.robustness.iter().map(|r| r.as_ref().map(|r| r.value)).collect(),
        },
    }
}

/// Designs the scenario's modifications; writes `design.json` and `schedule.json`.
pub fn design(scenario: &Scenario, ov: &Overrides) -> Result<(DesignReport, Vec<Artifact>), CliError> {
    let sc = ov.apply(scenario);
    let built = sc.build(ov.tree)?;
    let d = design_scenario(&sc, &built)?;
    let report = design_report(&d);
    let artifacts = vec![Artifact::json("design.json", &report)?, Artifact::json("schedule.json", &report.schedule)?];
    Ok((report, artifacts))
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub controlled: bool,
    pub epsilon: Option<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub samples: usize,
    pub initial_error: f64,
    pub final_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub theta0: Vec<f64>,
}

/// Schedule a command runs with: the scenario's own, else a design of its
/// `delta`, else none.
fn active_schedule(sc: &Scenario, built: &Built) -> Result<(Option<VibrationSchedule>, Option<ClusterDesign>), CliError> {
    if let Some(s) = &built.schedule {
        return Ok((Some(s.clone()), None));
    }
    if has_design(&built.delta) {
        let d = design_scenario(sc, built)?;
        return Ok((Some(d.schedule.clone()), Some(d)));
    }
    Ok((None, None))
}

/// Initial phases from the scenario's simulation settings.
pub fn initial_state(sc: &Scenario, built: &Built) -> Result<Vec<f64>, CliError> {
    let sim = &sc.simulation;
    if let Some(t) = &sim.theta0 {
        if t.len() != built.kn.n() {
            return Err(CliError::Validation(format!("theta0 has {} entries for {} nodes", t.len(), built.kn.n())));
        }
        return Ok(t.clone());
    }
    let base = seeded_manifold_state(&built.kn, sim.seed);
    let theta = match sim.initial {
        crate::scenario::InitialKind::GrowingMode => {
            growing_mode_perturbation(&built.kn, &base, sim.perturbation, sim.settle, sim.seed)?
        }
        crate::scenario::InitialKind::Random => {
            perturbed_initial_states(&built.inc, &base, 1, sim.perturbation, sim.seed).remove(0)
        }
    };
    Ok(theta.iter().map(|t| t.rem_euclid(std::f64::consts::TAU)).collect())
}

fn cluster_error(theta: &[f64], nodes: &[usize]) -> f64 {
    let mut e = 0.0_f64;
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            e = e.max(geodesic_distance(theta[i], theta[j]));
        }
    }
    e
}

fn error_csv(kn: &KuramotoNetwork, traj: &Trajectory, norms: &[f64]) -> String {
    let r = kn.partition.r();
    let mut s = String::from("t,err,x_norm");
    for k in 1..=r {
        s.push_str(&format!(",err_cluster_{k}"));
    }
    s.push('\n');
    for ((t, th), x) in traj.times.iter().zip(&traj.theta).zip(norms) {
        s.push_str(&format!("{t},{},{x}", state_sync_error(th, &kn.partition)));
        for k in 0..r {
            s.push_str(&format!(",{}", cluster_error(th, kn.partition.cluster(k))));
        }
        s.push('\n');
    }
    s
}

/// Integrates the scenario; writes `trajectory.csv`, `err.csv`, `plot.gp`, `summary.json`.
pub fn simulate(scenario: &Scenario, ov: &Overrides) -> Result<(SimulationSummary, Vec<Artifact>), CliError> {
    let sc = ov.apply(scenario);
    let built = sc.build(ov.tree)?;
    let (sched, _) = active_schedule(&sc, &built)?;
    let theta0 = initial_state(&sc, &built)?;
    let traj = integrate(&built.kn, sched.as_ref(), &theta0, sc.simulation.t_end, sc.simulation.dt)?;
    let errs: Vec<f64> = traj.theta.iter().map(|th| state_sync_error(th, &built.kn.partition)).collect();
    let norms = traj.wrapped_x_norms(&built.inc);

    let mut csv = Vec::new();
    traj.write_csv(&mut csv, &built.kn.partition).map_err(|e| CliError::Compute(e.to_string()))?;
    let controlled = sched.as_ref().is_some_and(|s| !s.is_empty());
    let summary = SimulationSummary {
        controlled,
        epsilon: sched.as_ref().map(|s| s.epsilon),
        t_end: sc.simulation.t_end,
        dt: traj.dt,
        samples: traj.len(),
        initial_error: errs[0],
        final_error: *errs.last().expect("nonempty"),
        min_error: errs.iter().copied().fold(f64::INFINITY, f64::min),
        max_error: errs.iter().copied().fold(0.0, f64::max),
        theta0,
    };
    let title = if controlled { "controlled" } else { "uncontrolled" };
    let artifacts = vec![
        Artifact::new("trajectory.csv", csv),
        Artifact::new("err.csv", error_csv(&built.kn, &traj, &norms)),
        Artifact::new("plot.gp", simulation_script(title, built.kn.n())),
        Artifact::json("summary.json", &summary)?,
    ];
    Ok((summary, artifacts))
}

// ---------------------------------------------------------------- certify

/// Certificate options taken from the scenario's simulation settings.
pub fn certify_options(sc: &Scenario) -> CertifyOptions {
    let sim = &sc.simulation;
    CertifyOptions {
        averaging: averaging_options(sc),
        empirical: Some(EmpiricalOptions {
            members: sim.members,
            perturbation: sim.perturbation,
            seed: sim.seed,
            t_end: Some(sim.t_end),
            classifier: ClassifierOptions::default(),
        }),
        sweep_epsilons: vec![0.1, 0.01, 0.001],
        sweep_members: sim.sweep_members,
        sweep_t_end: sim.sweep_t_end,
    }
}

/// Full certificate of the scenario's schedule; writes `certificate.json`.
///
/// Tree edges and cluster indices in the written report are 1-based.
pub fn certify(scenario: &Scenario, ov: &Overrides) -> Result<(StabilityReport, Vec<Artifact>), CliError> {
    let sc = ov.apply(scenario);
    let built = sc.build(ov.tree)?;
    let (sched, designed) = active_schedule(&sc, &built)?;
    let targets = designed.as_ref().map(|d| d.certificate.targets.clone());
    let mut report = run_certify(&built.kn, &built.inc, sched.as_ref(), targets.as_deref(), &certify_options(&sc))?;
    report.tree = report.tree.iter().map(|&(a, b)| (a + 1, b + 1)).collect();
    for c in &mut report.clusters {
        c.index += 1;
    }
    if let stability_cert::CertificateStatus::Failed { cluster, .. } = &mut report.status {
        *cluster += 1;
    }
    let artifact = Artifact::json("certificate.json", &report)?;
    Ok((report, vec![artifact]))
}
