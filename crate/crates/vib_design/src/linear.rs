use std::collections::BTreeSet;

use graph_core::{matrix_graph, permutation_to_qlt, topological_order, Permutation};
use linalg::trig::{exact_average, BasisTerm};
use linalg::{conjugated_average, default_horizon, max_abs, AverageOptions, AveragedSystem, LinalgError, SinusoidalMatrix, TimeMatrix};
use nalgebra::DMatrix;

use crate::frequency::pool_value_at_least;
use crate::{modifiable_graph, validate_modification, DesignError, ModifiableMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// Verification tolerance is `tolerance_factor · max(max|Δ|, tolerance_floor)`.
    pub tolerance_factor: f64,
    pub tolerance_floor: f64,
    /// Share of the tolerance the exact averaged residual may use, leaving
    /// the rest for quadrature error in the final check.
    pub exact_share: f64,
    /// Number of frequency-separation levels tried; separation `ρ = 2^(k/2)`.
    pub escalation_steps: u32,
    pub averaging: AverageOptions,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            tolerance_factor: 1e-2,
            tolerance_floor: 0.01,
            exact_share: 0.5,
            escalation_steps: 13,
            averaging: AverageOptions::default(),
        }
    }
}

impl DesignOptions {
    pub fn tolerance(&self, delta: &DMatrix<f64>) -> f64 {
        self.tolerance_factor * max_abs(delta).max(self.tolerance_floor)
    }
}

/// One designed vibration, placed on entry `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedSlot {
    pub row: usize,
    pub col: usize,
    /// Longest chain of earlier modifications feeding this one.
    pub level: usize,
    /// `r = u/β`.
    pub ratio: f64,
    /// `β = √pool_value`.
    pub frequency: f64,
    /// `u = r·β`.
    pub amplitude: f64,
    pub pool_value: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearDesign {
    /// Ordering that makes `Δ` strictly lower-triangular.
    pub permutation: Permutation,
    /// Slots in original coordinates.
    pub slots: Vec<DesignedSlot>,
    /// Fast-time forcing `U(τ)` in original coordinates.
    pub forcing: SinusoidalMatrix,
    /// Exact long-time average of the design.
    pub exact_average: DMatrix<f64>,
    /// Numerical check; `None` for an empty design.
    pub averaged: Option<AveragedSystem>,
    pub residual: f64,
    pub tolerance: f64,
    /// Frequency separation that was needed.
    pub rho: f64,
}

/// A slot to solve for: its entry and the unit-normalized matrix it drives.
pub(crate) struct SlotShape {
    pub row: usize,
    pub col: usize,
    pub matrix: DMatrix<f64>,
}

pub(crate) struct SlotSolution {
    pub slots: Vec<DesignedSlot>,
    pub exact: DMatrix<f64>,
    pub rho: f64,
}

/// Longest-path depth of every node in the graph of `delta`.
fn node_depths(delta: &DMatrix<f64>) -> Result<Vec<usize>, DesignError> {
    let g = matrix_graph(delta);
    let order = topological_order(&g)?;
    let mut depth = vec![0usize; delta.nrows()];
    for &v in &order {
        for e in g.edges().iter().filter(|e| e.source == v) {
            depth[e.target] = depth[e.target].max(depth[v] + 1);
        }
    }
    Ok(depth)
}

fn to_design_error(e: LinalgError) -> DesignError {
    match e {
        LinalgError::NotNilpotent | LinalgError::Secular => {
            DesignError::NotRealizable(format!("combined forcing does not terminate ({e})"))
        }
        other => DesignError::Linalg(other),
    }
}

/// Horizon multipliers tried when the quadrature average has not settled.
const HORIZON_EXTENSIONS: [f64; 3] = [1.0, 4.0, 16.0];

/// Numerical average of `a` under `p`, lengthening the default horizon while
/// the `T` versus `2T` check fails. An explicit horizon is used as given.
pub(crate) fn verified_average(
    a: &DMatrix<f64>,
    p: &SinusoidalMatrix,
    opts: AverageOptions,
) -> Result<AveragedSystem, DesignError> {
    if opts.horizon.is_some() {
        return Ok(conjugated_average(a, p, opts)?);
    }
    let base = default_horizon(p.min_frequency());
    let mut last = None;
    for m in HORIZON_EXTENSIONS {
        match conjugated_average(a, p, AverageOptions { horizon: Some(base * m), ..opts }) {
            Err(e @ LinalgError::HorizonTooShort { .. }) => last = Some(e),
            other => return Ok(other?),
        }
    }
    Err(last.expect("at least one attempt").into())
}

/// Solves ratios and frequencies so that the exact average of `a` under the
/// slot forcing equals `a + delta`.
///
/// Frequencies are `√p` for pool values assigned in `(level, row, col)` order,
/// with level-`L` slots drawn from values `≥ ρ^(2L)`. Support entries are
/// corrected by fixed-point iteration on `r²`; `ρ` grows until the remaining
/// cross-terms fit in the exact share of the tolerance.
pub(crate) fn solve_slots(
    a: &DMatrix<f64>,
    delta: &DMatrix<f64>,
    shapes: &[SlotShape],
    reserved: &BTreeSet<u64>,
    opts: &DesignOptions,
) -> Result<SlotSolution, DesignError> {
    let target = a + delta;
    let tol = opts.tolerance(delta);
    let depth = node_depths(delta)?;
    let levels: Vec<usize> = shapes.iter().map(|s| depth[s.col]).collect();
    let mut order: Vec<usize> = (0..shapes.len()).collect();
    order.sort_by_key(|&i| (levels[i], shapes[i].row, shapes[i].col));
    let reverse: Vec<f64> = shapes.iter().map(|s| a[(s.col, s.row)]).collect();

    let mut best_residual = f64::INFINITY;
    for k in 0..opts.escalation_steps {
        let rho2 = 2f64.powi(k as i32);
        let mut pool = vec![0u64; shapes.len()];
        let mut taken: BTreeSet<u64> = reserved.clone();
        let mut exhausted = false;
        for &i in &order {
            match pool_value_at_least(rho2.powi(levels[i] as i32), |p| taken.contains(&p)) {
                Some(p) => {
                    pool[i] = p;
                    taken.insert(p);
                }
                None => exhausted = true,
            }
        }
        if exhausted {
            break;
        }
        let basis: Vec<f64> = pool.iter().map(|&p| (p as f64).sqrt()).collect();
        let mut r2: Vec<f64> = shapes
            .iter()
            .zip(&reverse)
            .map(|(s, rev)| -2.0 * delta[(s.row, s.col)] / rev)
            .collect();
        let scale = 1.0 + max_abs(&target);
        let mut exact = None;
        for _ in 0..200 {
            if r2.iter().any(|v| !(*v > 0.0)) {
                break;
            }
            let terms: Vec<BasisTerm> = shapes
                .iter()
                .enumerate()
                .map(|(i, s)| BasisTerm { matrix: s.matrix.clone(), amplitude: r2[i].sqrt() * basis[i], index: i })
                .collect();
            let jbar = exact_average(a, &terms, &basis).map_err(to_design_error)?;
            let errs: Vec<f64> = shapes.iter().map(|s| jbar[(s.row, s.col)] - target[(s.row, s.col)]).collect();
            if errs.iter().all(|e| e.abs() <= 1e-13 * scale) {
                exact = Some(jbar);
                break;
            }
            for (i, e) in errs.iter().enumerate() {
                r2[i] += 2.0 * e / reverse[i];
            }
        }
        let Some(jbar) = exact else { continue };
        let mut residual = 0.0_f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if delta[(i, j)] == 0.0 {
                    residual = residual.max((jbar[(i, j)] - target[(i, j)]).abs());
                }
            }
        }
        best_residual = best_residual.min(residual);
        if residual <= opts.exact_share * tol {
            let slots = shapes
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let ratio = r2[i].sqrt();
                    DesignedSlot {
                        row: s.row,
                        col: s.col,
                        level: levels[i],
                        ratio,
                        frequency: basis[i],
                        amplitude: ratio * basis[i],
                        pool_value: pool[i],
                    }
                })
                .collect();
            return Ok(SlotSolution { slots, exact: jbar, rho: rho2.sqrt() });
        }
    }
    Err(DesignError::VerificationFailed { residual: best_residual, tolerance: opts.exact_share * tol })
}

/// Designs a vibration schedule realizing `ẋ = (A + Δ)x` on average.
pub fn design_linear(
    a: &DMatrix<f64>,
    delta: &DMatrix<f64>,
    opts: &DesignOptions,
) -> Result<LinearDesign, DesignError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(DesignError::InvalidSpec(format!("A is {}x{}", n, a.ncols())));
    }
    let violations = validate_modification(delta, &modifiable_graph(a, ModifiableMode::Linear));
    if !violations.is_empty() {
        return Err(DesignError::Violations(violations));
    }
    let permutation = permutation_to_qlt(delta)?;
    let tolerance = opts.tolerance(delta);
    if delta.iter().all(|v| *v == 0.0) {
        return Ok(LinearDesign {
            permutation,
            slots: Vec::new(),
            forcing: SinusoidalMatrix::new(n),
            exact_average: a.clone(),
            averaged: None,
            residual: 0.0,
            tolerance,
            rho: 1.0,
        });
    }
    let ap = permutation.apply(a);
    let dp = permutation.apply(delta);
    let mut shapes = Vec::new();
    for p in 0..n {
        for q in 0..p {
            if dp[(p, q)] != 0.0 {
                let mut m = DMatrix::zeros(n, n);
                m[(p, q)] = 1.0;
                shapes.push(SlotShape { row: p, col: q, matrix: m });
            }
        }
    }
    let sol = solve_slots(&ap, &dp, &shapes, &BTreeSet::new(), opts)?;

    let mut forcing = SinusoidalMatrix::new(n);
    let mut slots = Vec::with_capacity(sol.slots.len());
    for (s, shape) in sol.slots.iter().zip(&shapes) {
        forcing.push(permutation.unapply(&shape.matrix), s.amplitude, s.frequency);
        slots.push(DesignedSlot { row: permutation.order[s.row], col: permutation.order[s.col], ..s.clone() });
    }
    let averaged = verified_average(a, &forcing, opts.averaging)?;
    let residual = max_abs(&(&averaged.jbar - (a + delta)));
    if !(residual < tolerance) {
        return Err(DesignError::VerificationFailed { residual, tolerance });
    }
    let exact_average = permutation.unapply(&sol.exact);
    Ok(LinearDesign {
        permutation,
        slots,
        forcing,
        exact_average,
        averaged: Some(averaged),
        residual,
        tolerance,
        rho: sol.rho,
    })
}
