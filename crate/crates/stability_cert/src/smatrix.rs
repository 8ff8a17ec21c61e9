use linalg::{is_hurwitz, is_m_matrix, max_real_eigenvalue, robustness, RobustnessValue};
use nalgebra::DMatrix;

/// Interconnection test matrix and the per-cluster data behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    /// `None` when some block is not Hurwitz.
    pub s: Option<DMatrix<f64>>,
    pub robustness: Vec<Option<RobustnessValue>>,
    pub hurwitz: Vec<bool>,
    pub max_real: Vec<Option<f64>>,
    pub m_matrix: bool,
    /// Index of the first non-Hurwitz block.
    pub failed_cluster: Option<usize>,
}

/// `s_kk = R_k − γ̄_kk`, `s_kℓ = −γ̄_kℓ`.
pub fn s_from_robustness(values: &[f64], gamma: &DMatrix<f64>) -> DMatrix<f64> {
    let r = values.len();
    DMatrix::from_fn(r, r, |k, l| if k == l { values[k] - gamma[(k, k)] } else { -gamma[(k, l)] })
}

/// Builds `S` from per-cluster matrices (averaged Jacobians, or targets
/// `J^(k) + Δ^(k)`) and interconnection gains, then tests it.
pub fn build_s(blocks: &[DMatrix<f64>], gamma: &DMatrix<f64>) -> SMatrix {
    let hurwitz: Vec<bool> = blocks.iter().map(is_hurwitz).collect();
    let max_real = blocks.iter().map(|b| max_real_eigenvalue(b).ok()).collect();
    let robustness: Vec<Option<RobustnessValue>> =
        blocks.iter().map(|b| robustness(b).ok()).collect();
    let failed_cluster = hurwitz.iter().position(|h| !h).or_else(|| robustness.iter().position(Option::is_none));
    let s = failed_cluster.is_none().then(|| {
        let values: Vec<f64> = robustness.iter().map(|r| r.as_ref().expect("checked").value).collect();
        s_from_robustness(&values, gamma)
    });
    let m_matrix = s.as_ref().is_some_and(is_m_matrix);
    SMatrix { s, robustness, hurwitz, max_real, m_matrix, failed_cluster }
}
