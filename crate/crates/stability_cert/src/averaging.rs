use graph_core::IncidenceSet;
use kuramoto_dynamics::{cluster_forcing, VibrationSchedule};
use linalg::{conjugated_average, AverageOptions, AveragedSystem};
use nalgebra::DMatrix;

use crate::CertError;

/// Per-cluster averaged Jacobians `J̄^(k)` for an intra-cluster schedule.
///
/// Clusters without vibrations keep `J̄^(k) = J^(k)` exactly.
pub fn averaged_jacobians(
    blocks: &[DMatrix<f64>],
    sched: Option<&VibrationSchedule>,
    inc: &IncidenceSet,
    opts: AverageOptions,
) -> Result<Vec<AveragedSystem>, CertError> {
    if blocks.len() != inc.r_clusters() {
        return Err(CertError::Invalid(format!(
            "{} Jacobian blocks for {} clusters",
            blocks.len(),
            inc.r_clusters()
        )));
    }
    let mut out = Vec::with_capacity(blocks.len());
    for (k, j) in blocks.iter().enumerate() {
        let avg = match sched {
            Some(s) => conjugated_average(j, &cluster_forcing(inc, s, k), opts)?,
            None => AveragedSystem {
                jbar: j.clone(),
                jbar_doubled: j.clone(),
                horizon: 0.0,
                dt: 0.0,
                relative_change: 0.0,
            },
        };
        out.push(avg);
    }
    Ok(out)
}
