use graph_core::IncidenceSet;
use linalg::{default_horizon, default_step, sample_transition, TimeMatrix};
use nalgebra::DMatrix;

use crate::{cluster_forcing, linearize, DynamicsError, KuramotoNetwork, Linearization, VibrationSchedule};

/// Margin applied to the sampled transition-matrix supremum when vibrations
/// are present, covering the gap between grid samples and the true supremum.
pub const BOUND_SAFETY_FACTOR: f64 = 1.05;

/// Interconnection gains `γ̄_kℓ = c·c_kℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationBounds {
    /// Spectral norms of the blocks of the envelope of `N(y)`.
    pub c_blocks: DMatrix<f64>,
    /// Transition-matrix factor `c`.
    pub c: f64,
    pub gamma: DMatrix<f64>,
}

/// Sampled suprema `(sup ‖Φ̃‖, sup ‖Φ̃⁻¹‖)` of the mean-normalized transition
/// matrix `Φ̃ = Φ·(mean Φ)⁻¹` of one cluster's forcing.
fn transition_suprema(p: &dyn TimeMatrix) -> Result<(f64, f64), DynamicsError> {
    if p.max_frequency() == 0.0 {
        return Ok((1.0, 1.0));
    }
    let horizon = default_horizon(p.min_frequency());
    let dt = default_step(p);
    let n = p.dim();
    let mut sum = DMatrix::<f64>::zeros(n, n);
    let mut first = None;
    let mut last = DMatrix::<f64>::zeros(n, n);
    let mut count = 0usize;
    sample_transition(p, horizon, dt, |_, phi, _| {
        sum += phi;
        if first.is_none() {
            first = Some(phi.clone());
        }
        last.copy_from(phi);
        count += 1;
    })?;
    let first = first.expect("at least one sample");
    let steps = (count - 1) as f64;
    let mean = (sum - (&first + &last) * 0.5) / steps;
    let normalizer = mean.clone().try_inverse().ok_or(linalg::LinalgError::Singular)?;
    let (mut sup_phi, mut sup_inv) = (0.0_f64, 0.0_f64);
    sample_transition(p, horizon, dt, |_, phi, psi| {
        sup_phi = sup_phi.max((phi * &normalizer).norm_spectral());
        sup_inv = sup_inv.max((&mean * psi).norm_spectral());
    })?;
    Ok((sup_phi, sup_inv))
}

trait SpectralNorm {
    fn norm_spectral(&self) -> f64;
}

impl SpectralNorm for DMatrix<f64> {
    fn norm_spectral(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.singular_values().max()
    }
}

/// Growth bounds of the inter-cluster coupling in the averaged coordinates.
pub fn perturbation_bounds(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    sched: Option<&VibrationSchedule>,
) -> Result<PerturbationBounds, DynamicsError> {
    let lin: Linearization = linearize(kn, inc)?;
    let r = inc.r_clusters();
    if let Some(s) = sched {
        s.validate(kn)?;
        if !s.is_intra_only(&kn.partition) {
            return Err(DynamicsError::InvalidSchedule(
                "perturbation bounds need an intra-cluster-only schedule".into(),
            ));
        }
    }
    let env = lin.inter.envelope();
    let c_blocks = DMatrix::from_fn(r, r, |k, l| Linearization::block_of(inc, &env, k, l).norm_spectral());

    let vibrated = sched.is_some_and(|s| !s.is_empty());
    let c = if vibrated {
        let sched = sched.expect("checked");
        let mut sups = Vec::with_capacity(r);
        for k in 0..r {
            sups.push(transition_suprema(&cluster_forcing(inc, sched, k))?);
        }
        let max_phi = sups.iter().map(|s| s.0).fold(0.0, f64::max);
        let max_inv = sups.iter().map(|s| s.1).fold(0.0, f64::max);
        BOUND_SAFETY_FACTOR * max_phi * max_inv
    } else {
        1.0
    };
    let gamma = &c_blocks * c;
    Ok(PerturbationBounds { c_blocks, c, gamma })
}
