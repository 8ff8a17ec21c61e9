use graph_core::IncidenceSet;
use kuramoto_dynamics::{
    classify_partial_stability, default_horizon, linearize, perturbation_bounds, perturbed_initial_states,
    run_ensemble, seeded_manifold_state, ClassifierOptions, KuramotoNetwork, Stability, VibrationSchedule,
    BOUND_SAFETY_FACTOR,
};
use linalg::{AverageOptions, HURWITZ_MARGIN, LYAPUNOV_RESIDUAL_BOUND};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{averaged_jacobians, build_s, to_rows, CertError, SMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalOptions {
    pub members: usize,
    /// `‖x(0)‖` of each ensemble member.
    pub perturbation: f64,
    pub seed: u64,
    /// Defaults to `200/|slowest averaged rate|`, capped at 500.
    pub t_end: Option<f64>,
    pub classifier: ClassifierOptions,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        Self { members: 10, perturbation: 0.1, seed: 0, t_end: None, classifier: ClassifierOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub averaging: AverageOptions,
    /// `None` skips simulation entirely.
    pub empirical: Option<EmpiricalOptions>,
    /// Fast-time scales of the sweep; empty disables it.
    pub sweep_epsilons: Vec<f64>,
    pub sweep_members: usize,
    pub sweep_t_end: Option<f64>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            averaging: AverageOptions::default(),
            empirical: Some(EmpiricalOptions::default()),
            sweep_epsilons: vec![0.1, 0.01, 0.001],
            sweep_members: 2,
            sweep_t_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// The interconnection test passes for the averaged Jacobians.
    Certified,
    /// The test fails but every simulated perturbation decays.
    EmpiricallyStableUncertified,
    /// The test fails and simulation does not show stability (or was skipped).
    Uncertified,
    /// A cluster's averaged Jacobian is not Hurwitz.
    Failed { cluster: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub index: usize,
    pub jacobian: Vec<Vec<f64>>,
    pub averaged_jacobian: Vec<Vec<f64>>,
    pub averaging_relative_change: f64,
    pub averaging_horizon: f64,
    pub hurwitz: bool,
    pub max_real_eigenvalue: Option<f64>,
    pub robustness: Option<f64>,
    pub lyapunov_solution: Option<Vec<Vec<f64>>>,
    pub lyapunov_residual: Option<f64>,
    pub target: Option<Vec<Vec<f64>>>,
    pub target_robustness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub stable: bool,
    pub rate: Option<f64>,
    pub slopes: Vec<f64>,
    pub initial_norms: Vec<f64>,
    pub final_norms: Vec<f64>,
    pub members: usize,
    pub t_end: f64,
    pub epsilon: Option<f64>,
    pub perturbation: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub stable: bool,
    pub rate: Option<f64>,
    pub worst_final_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub averaging_relative_tolerance: f64,
    pub hurwitz_margin: f64,
    pub lyapunov_residual_bound: f64,
    pub bound_safety_factor: f64,
    pub classifier_slope_threshold: f64,
    pub classifier_decay_factor: f64,
    pub classifier_tail_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub tree: Vec<(usize, usize)>,
    pub epsilon: Option<f64>,
    pub clusters: Vec<ClusterReport>,
    pub c_blocks: Vec<Vec<f64>>,
    pub c_factor: f64,
    pub gamma: Vec<Vec<f64>>,
    /// `S` built from the averaged Jacobians.
    pub s_averaged: Option<Vec<Vec<f64>>>,
    pub m_matrix_averaged: bool,
    /// `S` built from the design targets `J^(k) + Δ^(k)`, when given.
    pub s_target: Option<Vec<Vec<f64>>>,
    pub m_matrix_target: Option<bool>,
    pub status: CertificateStatus,
    pub empirical: Option<EmpiricalReport>,
    pub sweep: Vec<SweepRow>,
    /// True when no sweep row is unstable while a larger `ε` was stable.
    pub sweep_monotone: bool,
    pub sweep_deviations: Vec<String>,
    pub tolerances: Tolerances,
}

impl StabilityReport {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

fn status_from(s: &SMatrix, empirical: Option<&EmpiricalReport>) -> CertificateStatus {
    if let Some(k) = s.failed_cluster {
        CertificateStatus::Failed {
            cluster: k,
            reason: format!("averaged Jacobian of cluster {k} is not Hurwitz (max real part {:?})", s.max_real[k]),
        }
    } else if s.m_matrix {
        CertificateStatus::Certified
    } else if empirical.is_some_and(|e| e.stable) {
        CertificateStatus::EmpiricallyStableUncertified
    } else {
        CertificateStatus::Uncertified
    }
}

fn with_epsilon(sched: Option<&VibrationSchedule>, epsilon: f64) -> Option<VibrationSchedule> {
    sched.map(|s| VibrationSchedule { epsilon, ..s.clone() })
}

#[allow(clippy::too_many_arguments)]
fn empirical_run(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    sched: Option<&VibrationSchedule>,
    members: usize,
    perturbation: f64,
    seed: u64,
    t_end: f64,
    classifier: ClassifierOptions,
) -> Result<EmpiricalReport, CertError> {
    let base = seeded_manifold_state(kn, seed);
    let initial = perturbed_initial_states(inc, &base, members, perturbation, seed);
    let (_, records) = run_ensemble(kn, inc, sched, &initial, t_end)?;
    let c = classify_partial_stability(&records, classifier);
    let (stable, rate) = match c.stability {
        Stability::Stable { rate } => (true, Some(rate)),
        Stability::Unstable => (false, None),
    };
    Ok(EmpiricalReport {
        stable,
        rate,
        slopes: c.slopes,
        initial_norms: c.initial_norms,
        final_norms: c.final_norms,
        members,
        t_end,
        epsilon: sched.map(|s| s.epsilon),
        perturbation,
        seed,
    })
}

/// Full certificate: linearize, average, bound, test `S`, then simulate.
///
/// `targets`, when given, are the intended `J^(k) + Δ^(k)` of a design and
/// produce the second `S` variant.
pub fn certify(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    sched: Option<&VibrationSchedule>,
    targets: Option<&[DMatrix<f64>]>,
    opts: &CertifyOptions,
) -> Result<StabilityReport, CertError> {
    if let Some(s) = sched {
        s.validate(kn)?;
        if !s.is_intra_only(&kn.partition) {
            return Err(CertError::Invalid("certificates need an intra-cluster-only schedule".into()));
        }
    }
    let lin = linearize(kn, inc)?;
    let averaged = averaged_jacobians(&lin.blocks, sched, inc, opts.averaging)?;
    let bounds = perturbation_bounds(kn, inc, sched)?;
    let jbar: Vec<DMatrix<f64>> = averaged.iter().map(|a| a.jbar.clone()).collect();
    let s_avg = build_s(&jbar, &bounds.gamma);

    let s_tgt = match targets {
        Some(t) => {
            if t.len() != lin.blocks.len() || t.iter().zip(&lin.blocks).any(|(a, b)| a.shape() != b.shape()) {
                return Err(CertError::Invalid("target blocks do not match the cluster Jacobians".into()));
            }
            Some(build_s(t, &bounds.gamma))
        }
        None => None,
    };

    let clusters = (0..lin.blocks.len())
        .map(|k| {
            let rv = s_avg.robustness[k].as_ref();
            ClusterReport {
                index: k,
                jacobian: to_rows(&lin.blocks[k]),
                averaged_jacobian: to_rows(&averaged[k].jbar),
                averaging_relative_change: averaged[k].relative_change,
                averaging_horizon: averaged[k].horizon,
                hurwitz: s_avg.hurwitz[k],
                max_real_eigenvalue: s_avg.max_real[k],
                robustness: rv.map(|r| r.value),
                lyapunov_solution: rv.map(|r| to_rows(&r.lyapunov_solution)),
                lyapunov_residual: rv.map(|r| r.residual),
                target: targets.map(|t| to_rows(&t[k])),
                target_robustness: s_tgt.as_ref().and_then(|s| s.robustness[k].as_ref().map(|r| r.value)),
            }
        })
        .collect();

    let classifier = opts.empirical.as_ref().map(|e| e.classifier).unwrap_or_default();
    let slowest = s_avg.max_real.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let empirical = match &opts.empirical {
        Some(e) => {
            let t_end = e.t_end.unwrap_or_else(|| default_horizon(slowest));
            Some(empirical_run(kn, inc, sched, e.members, e.perturbation, e.seed, t_end, e.classifier)?)
        }
        None => None,
    };

    let mut sweep = Vec::new();
    if sched.is_some_and(|s| !s.is_empty()) {
        let (perturbation, seed) =
            opts.empirical.as_ref().map_or((0.1, 0), |e| (e.perturbation, e.seed));
        let t_end = opts.sweep_t_end.unwrap_or_else(|| default_horizon(slowest));
        for &eps in &opts.sweep_epsilons {
            let s = with_epsilon(sched, eps);
            let run = empirical_run(kn, inc, s.as_ref(), opts.sweep_members, perturbation, seed, t_end, classifier)?;
            let worst = run.final_norms.iter().copied().fold(0.0, f64::max);
            sweep.push(SweepRow { epsilon: eps, stable: run.stable, rate: run.rate, worst_final_norm: worst });
        }
    }
    let mut ordered = sweep.clone();
    ordered.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let sweep_deviations: Vec<String> = ordered
        .windows(2)
        .filter(|w| w[0].stable && !w[1].stable)
        .map(|w| format!("stable at epsilon {} but not at {}", w[0].epsilon, w[1].epsilon))
        .collect();

    let status = status_from(&s_avg, empirical.as_ref());

    Ok(StabilityReport {
        tree: inc.tree.clone(),
        epsilon: sched.map(|s| s.epsilon),
        clusters,
        c_blocks: to_rows(&bounds.c_blocks),
        c_factor: bounds.c,
        gamma: to_rows(&bounds.gamma),
        s_averaged: s_avg.s.as_ref().map(to_rows),
        m_matrix_averaged: s_avg.m_matrix,
        s_target: s_tgt.as_ref().and_then(|s| s.s.as_ref().map(to_rows)),
        m_matrix_target: s_tgt.as_ref().map(|s| s.m_matrix),
        status,
        empirical,
        sweep_monotone: sweep_deviations.is_empty(),
        sweep,
        sweep_deviations,
        tolerances: Tolerances {
            averaging_relative_tolerance: opts.averaging.relative_tolerance,
            hurwitz_margin: HURWITZ_MARGIN,
            lyapunov_residual_bound: LYAPUNOV_RESIDUAL_BOUND,
            bound_safety_factor: BOUND_SAFETY_FACTOR,
            classifier_slope_threshold: classifier.slope_threshold,
            classifier_decay_factor: classifier.decay_factor,
            classifier_tail_fraction: classifier.tail_fraction,
        },
    })
}
