use graph_core::{check_invariance, IncidenceSet};
use linalg::SinusoidalMatrix;
use nalgebra::{DMatrix, DVector};

use crate::{DynamicsError, KuramotoNetwork, VibrationSchedule};

/// Inter-cluster part of the incremental Jacobian,
/// `N(y) = L·diag(cos(R3 y))·R2` with `L = −B̂_intraᵀ 𝔅_inter W_inter`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterStructure {
    pub left: DMatrix<f64>,
    pub r2: DMatrix<f64>,
    pub r3: DMatrix<f64>,
}

impl InterStructure {
    pub fn eval(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let c = (&self.r3 * y).map(f64::cos);
        let mut scaled = self.r2.clone();
        for (i, ci) in c.iter().enumerate() {
            scaled.row_mut(i).scale_mut(*ci);
        }
        &self.left * scaled
    }

    /// Entrywise bound `|L|·|R2| ≥ |N(y)|` for every `y`.
    pub fn envelope(&self) -> DMatrix<f64> {
        self.left.abs() * self.r2.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    /// `J^(k) = −B̂^(k)ᵀ 𝔅^(k) W^(k) R1^(k)` per cluster.
    pub blocks: Vec<DMatrix<f64>>,
    /// Block-diagonal assembly of `blocks`.
    pub full: DMatrix<f64>,
    pub inter: InterStructure,
}

impl Linearization {
    /// Block `(k, ℓ)` of an `(n − r)`-square matrix in `x` coordinates.
    pub fn block_of(inc: &IncidenceSet, m: &DMatrix<f64>, k: usize, l: usize) -> DMatrix<f64> {
        let (rk, rl) = (inc.cluster_tree_range(k), inc.cluster_tree_range(l));
        m.view((rk.start, rl.start), (rk.len(), rl.len())).clone_owned()
    }
}

/// Jacobian of the intra-cluster incremental dynamics at `x = 0`.
pub fn linearize(kn: &KuramotoNetwork, inc: &IncidenceSet) -> Result<Linearization, DynamicsError> {
    let report = check_invariance(&kn.net, &kn.partition, &kn.omega)?;
    if !report.holds {
        return Err(DynamicsError::InvarianceViolated(report.violations));
    }
    let d = inc.n_intra_tree();
    let mut full = DMatrix::zeros(d, d);
    let mut blocks = Vec::with_capacity(inc.r_clusters());
    for k in 0..inc.r_clusters() {
        let w = DMatrix::from_diagonal(&DVector::from_vec(inc.cluster_weights(k)));
        let jk = -(inc.b_hat_cluster(k).transpose() * inc.b_pos_cluster(k) * w * inc.r1_cluster(k));
        let rt = inc.cluster_tree_range(k);
        full.view_mut((rt.start, rt.start), (rt.len(), rt.len())).copy_from(&jk);
        blocks.push(jk);
    }
    let w_inter = DMatrix::from_diagonal(&DVector::from_vec(inc.inter_weights()));
    let left = -(inc.b_hat_intra().transpose() * inc.b_pos_inter() * w_inter);
    let inter = InterStructure { left, r2: inc.r2.clone(), r3: inc.r3.clone() };
    Ok(Linearization { blocks, full, inter })
}

/// Right-hand side of `ẋ` for the uncontrolled network at coordinates `(x, y)`.
pub fn incremental_field(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> DVector<f64> {
    let mut xy = DVector::zeros(x.len() + y.len());
    xy.rows_mut(0, x.len()).copy_from(x);
    xy.rows_mut(x.len(), y.len()).copy_from(y);
    let diffs = (&inc.r * xy).map(f64::sin);
    let weighted = DVector::from_iterator(
        diffs.len(),
        diffs.iter().zip(&inc.weights).map(|(s, w)| s * w),
    );
    let omega = DVector::from_column_slice(&kn.omega);
    let theta_dot = omega - &inc.b_pos * weighted;
    inc.b_hat_intra().tr_mul(&theta_dot)
}

/// Per-edge influence matrices `M_e = −(B̂^(k)ᵀ 𝔅^(k) e_c)(e_cᵀ R1^(k))` for
/// the intra edges of cluster `k`, keyed by `(source, target)`.
pub fn influence_matrices(inc: &IncidenceSet, k: usize) -> Vec<((usize, usize), DMatrix<f64>)> {
    let left = inc.b_hat_cluster(k).transpose() * inc.b_pos_cluster(k);
    let r1 = inc.r1_cluster(k);
    inc.cluster_edge_range(k)
        .enumerate()
        .map(|(local, col)| {
            let m = -(left.column(local) * r1.row(local));
            (inc.edges[col], m)
        })
        .collect()
}

/// Fast-time forcing `P^(k)(τ) = Σ_e u_e sin(β_e τ) M_e` of cluster `k`.
pub fn cluster_forcing(inc: &IncidenceSet, sched: &VibrationSchedule, k: usize) -> SinusoidalMatrix {
    let maps = influence_matrices(inc, k);
    let dim = inc.cluster_tree_range(k).len();
    let mut p = SinusoidalMatrix::new(dim);
    for e in &sched.entries {
        if let Some((_, m)) = maps.iter().find(|(edge, _)| *edge == (e.source, e.target)) {
            p.push(m.clone(), e.amplitude, e.frequency);
        }
    }
    p
}
