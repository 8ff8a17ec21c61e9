use std::collections::BTreeSet;

use graph_core::IncidenceSet;
use kuramoto_dynamics::{
    cluster_forcing, influence_matrices, linearize, perturbation_bounds, KuramotoNetwork, PerturbationBounds,
    VibrationEntry, VibrationSchedule,
};
use linalg::{max_abs, AveragedSystem};
use nalgebra::DMatrix;
use stability_cert::{build_s, SMatrix};

use crate::linear::{solve_slots, verified_average, SlotShape};
use crate::{influence_map, validate_modification, Combo, DesignError, DesignOptions, DesignedSlot, InfluenceMap};

/// Result for one cluster of a network design.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub cluster: usize,
    pub jacobian: DMatrix<f64>,
    pub delta: DMatrix<f64>,
    pub target: DMatrix<f64>,
    pub map: InfluenceMap,
    /// Chosen combination per slot, parallel to `slots`.
    pub combos: Vec<Combo>,
    pub slots: Vec<DesignedSlot>,
    /// Numerical average; `None` when nothing vibrates in this cluster.
    pub averaged: Option<AveragedSystem>,
    pub residual: f64,
    pub tolerance: f64,
    pub rho: f64,
}

/// Quantities the stability certificate is computed from.
#[derive(Debug, Clone)]
pub struct CertificateInputs {
    /// Target averaged Jacobian per cluster.
    pub targets: Vec<DMatrix<f64>>,
    pub bounds: PerturbationBounds,
    pub s: SMatrix,
}

#[derive(Debug, Clone)]
pub struct ClusterDesign {
    pub schedule: VibrationSchedule,
    pub outcomes: Vec<ClusterOutcome>,
    pub certificate: CertificateInputs,
}

/// Picks one combination per position with no edge used twice.
fn choose_combos(map: &InfluenceMap, positions: &[(usize, usize)]) -> Option<Vec<Combo>> {
    fn go(
        map: &InfluenceMap,
        positions: &[(usize, usize)],
        used: &mut BTreeSet<(usize, usize)>,
        chosen: &mut Vec<Combo>,
    ) -> bool {
        let Some(&pos) = positions.get(chosen.len()) else { return true };
        for c in map.combos_at(pos) {
            if c.edges.iter().any(|(e, _)| used.contains(e)) {
                continue;
            }
            used.extend(c.edges.iter().map(|x| x.0));
            chosen.push(c.clone());
            if go(map, positions, used, chosen) {
                return true;
            }
            let c = chosen.pop().expect("pushed above");
            for (e, _) in &c.edges {
                used.remove(e);
            }
        }
        false
    }
    let mut chosen = Vec::new();
    go(map, positions, &mut BTreeSet::new(), &mut chosen).then_some(chosen)
}

/// Designs intra-cluster vibrations so each cluster's averaged Jacobian
/// becomes `J^(k) + specs[k]`.
///
/// Frequencies are distinct across the whole network. The returned schedule
/// is checked per cluster by numerical averaging.
pub fn design_cluster(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    specs: &[DMatrix<f64>],
    epsilon: f64,
    opts: &DesignOptions,
) -> Result<ClusterDesign, DesignError> {
    let r = inc.r_clusters();
    if specs.len() != r {
        return Err(DesignError::InvalidSpec(format!("{} modifications for {r} clusters", specs.len())));
    }
    let lin = linearize(kn, inc)?;
    let mut schedule = VibrationSchedule::empty(epsilon);
    let mut reserved = BTreeSet::new();
    let mut outcomes = Vec::with_capacity(r);

    for (k, delta) in specs.iter().enumerate() {
        let jac = &lin.blocks[k];
        let d = jac.nrows();
        if delta.shape() != (d, d) {
            return Err(DesignError::InvalidSpec(format!(
                "cluster {} modification is {}x{}, expected {d}x{d}",
                k + 1,
                delta.nrows(),
                delta.ncols()
            )));
        }
        let map = influence_map(jac, influence_matrices(inc, k));
        let tolerance = opts.tolerance(delta);
        let mut outcome = ClusterOutcome {
            cluster: k,
            jacobian: jac.clone(),
            delta: delta.clone(),
            target: jac + delta,
            map,
            combos: Vec::new(),
            slots: Vec::new(),
            averaged: None,
            residual: 0.0,
            tolerance,
            rho: 1.0,
        };
        if delta.iter().all(|v| *v == 0.0) {
            outcomes.push(outcome);
            continue;
        }
        if outcome.map.realizable.edges().is_empty() {
            return Err(DesignError::NoRealizableEdges { cluster: k });
        }
        let violations = validate_modification(delta, &outcome.map.realizable);
        if !violations.is_empty() {
            return Err(DesignError::Violations(violations));
        }
        let positions: Vec<(usize, usize)> = (0..d)
            .flat_map(|p| (0..d).map(move |q| (p, q)))
            .filter(|&(p, q)| delta[(p, q)] != 0.0)
            .collect();
        let combos = choose_combos(&outcome.map, &positions).ok_or_else(|| {
            DesignError::NotRealizable(format!("cluster {} positions need a shared edge", k + 1))
        })?;
        let shapes: Vec<SlotShape> = combos
            .iter()
            .map(|c| SlotShape { row: c.position.0, col: c.position.1, matrix: c.matrix.clone() })
            .collect();
        let sol = solve_slots(jac, delta, &shapes, &reserved, opts)?;

        let mut local = VibrationSchedule::empty(epsilon);
        for (slot, combo) in sol.slots.iter().zip(&combos) {
            reserved.insert(slot.pool_value);
            for &((source, target), coef) in &combo.edges {
                local.entries.push(VibrationEntry {
                    source,
                    target,
                    amplitude: coef * slot.amplitude,
                    frequency: slot.frequency,
                });
            }
        }
        let averaged = verified_average(jac, &cluster_forcing(inc, &local, k), opts.averaging)?;
        let residual = max_abs(&(&averaged.jbar - &outcome.target));
        if !(residual < tolerance) {
            return Err(DesignError::VerificationFailed { residual, tolerance });
        }
        schedule.entries.extend(local.entries);
        outcome.combos = combos;
        outcome.slots = sol.slots;
        outcome.averaged = Some(averaged);
        outcome.residual = residual;
        outcome.rho = sol.rho;
        outcomes.push(outcome);
    }

    schedule.validate(kn)?;
    let bounds = perturbation_bounds(kn, inc, Some(&schedule))?;
    let targets: Vec<DMatrix<f64>> = outcomes.iter().map(|o| o.target.clone()).collect();
    let s = build_s(&targets, &bounds.gamma);
    Ok(ClusterDesign { schedule, outcomes, certificate: CertificateInputs { targets, bounds, s } })
}
