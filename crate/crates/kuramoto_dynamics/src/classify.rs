use graph_core::IncidenceSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sync::state_sync_error;
use crate::{simulate, DynamicsError, KuramotoNetwork, Trajectory, VibrationSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierOptions {
    /// Fraction of each record, counted from the end, used for the slope fit.
    pub tail_fraction: f64,
    /// Every fitted slope of `ln‖x‖` must be below this.
    pub slope_threshold: f64,
    /// Required ratio of initial to final `‖x‖`.
    pub decay_factor: f64,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        Self { tail_fraction: 0.5, slope_threshold: -1e-3, decay_factor: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stability {
    /// Worst (largest) fitted exponential rate across the ensemble.
    Stable { rate: f64 },
    Unstable,
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Self::Stable { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub stability: Stability,
    pub slopes: Vec<f64>,
    pub initial_norms: Vec<f64>,
    pub final_norms: Vec<f64>,
}

/// Norms below this count as converged; the fit stops at the first one.
const NORM_FLOOR: f64 = 1e-12;

/// Least-squares slope of `ln y` against `t` over the tail of a record.
fn tail_slope(times: &[f64], norms: &[f64], tail_fraction: f64) -> f64 {
    let cut = norms.iter().position(|&v| v < NORM_FLOOR).map_or(norms.len(), |i| i + 1);
    let (times, norms) = (&times[..cut], &norms[..cut]);
    let start = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * times.len() as f64) as usize;
    let pts: Vec<(f64, f64)> = times[start..]
        .iter()
        .zip(&norms[start..])
        .map(|(&t, &v)| (t, v.max(NORM_FLOOR).ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / k, a.1 + p.1 / k));
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mt) * (p.1 - my), a.1 + (p.0 - mt).powi(2)));
    num / den
}

/// Classifies an ensemble of `(times, ‖x(t)‖)` records.
///
/// Stable iff every tail slope is below the threshold and every final norm
/// is below its initial norm divided by the decay factor.
pub fn classify_partial_stability(
    records: &[(Vec<f64>, Vec<f64>)],
    opts: ClassifierOptions,
) -> Classification {
    let mut slopes = Vec::with_capacity(records.len());
    let mut initial_norms = Vec::with_capacity(records.len());
    let mut final_norms = Vec::with_capacity(records.len());
    let mut stable = !records.is_empty();
    for (times, norms) in records {
        let s = tail_slope(times, norms, opts.tail_fraction);
        let (first, last) = (norms[0], *norms.last().expect("nonempty record"));
        stable &= s < opts.slope_threshold && last < first / opts.decay_factor;
        slopes.push(s);
        initial_norms.push(first);
        final_norms.push(last);
    }
    let stability = if stable {
        Stability::Stable { rate: slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max) }
    } else {
        Stability::Unstable
    };
    Classification { stability, slopes, initial_norms, final_norms }
}

/// A point on the manifold with one seeded uniform phase per cluster.
pub fn seeded_manifold_state(kn: &KuramotoNetwork, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = vec![0.0; kn.n()];
    for c in kn.partition.clusters() {
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        for &i in c {
            theta[i] = phase;
        }
    }
    theta
}

/// `count` states at `‖x‖ = magnitude` around `base`, in seeded random directions.
pub fn perturbed_initial_states(
    inc: &IncidenceSet,
    base: &[f64],
    count: usize,
    magnitude: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = &inc.tree[..inc.n_intra_tree()];
    (0..count)
        .map(|_| {
            let delta: Vec<f64> = base.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = tree
                .iter()
                .map(|&(s, t)| (delta[t] - delta[s]).powi(2))
                .sum::<f64>()
                .sqrt()
                .max(1e-300);
            base.iter().zip(&delta).map(|(b, d)| b + d * magnitude / norm).collect()
        })
        .collect()
}

/// Initial state whose offset from the manifold lies along the mode that the
/// uncontrolled network amplifies, at cluster sync error `magnitude`.
///
/// A tiny seeded perturbation of `base` is run uncontrolled for `settle`
/// time units next to an unperturbed reference. In the final tenth of that run
/// the sample with the smallest sync error is taken, and the offset there is
/// rescaled to `magnitude` and added to the reference state.
pub fn growing_mode_perturbation(
    kn: &KuramotoNetwork,
    base: &[f64],
    magnitude: f64,
    settle: f64,
    seed: u64,
) -> Result<Vec<f64>, DynamicsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeded: Vec<f64> = base.iter().map(|b| b + 1e-7 * rng.random_range(-1.0..1.0)).collect();
    let reference = simulate(kn, None, base, settle, None)?;
    let perturbed = simulate(kn, None, &seeded, settle, None)?;
    let start = reference.len() * 9 / 10;
    let pick = (start..reference.len())
        .min_by(|&a, &b| {
            let ea = state_sync_error(&perturbed.theta[a], &kn.partition);
            let eb = state_sync_error(&perturbed.theta[b], &kn.partition);
            ea.total_cmp(&eb)
        })
        .expect("nonempty window");
    let r = &reference.theta[pick];
    let delta: Vec<f64> = perturbed.theta[pick].iter().zip(r).map(|(p, q)| p - q).collect();
    let direction: Vec<f64> = r.iter().zip(&delta).map(|(q, d)| q + d).collect();
    let err = state_sync_error(&direction, &kn.partition).max(1e-300);
    let scale = magnitude / err;
    Ok(r.iter().zip(&delta).map(|(q, d)| q + scale * d).collect())
}

/// Simulates every initial state and returns `(times, wrapped ‖x‖)` records.
pub fn run_ensemble(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    sched: Option<&VibrationSchedule>,
    initial: &[Vec<f64>],
    t_end: f64,
) -> Result<(Vec<Trajectory>, Vec<(Vec<f64>, Vec<f64>)>), DynamicsError> {
    let mut trajectories = Vec::with_capacity(initial.len());
    let mut records = Vec::with_capacity(initial.len());
    for theta0 in initial {
        let traj = simulate(kn, sched, theta0, t_end, None)?;
        records.push((traj.times.clone(), traj.wrapped_x_norms(inc)));
        trajectories.push(traj);
    }
    Ok((trajectories, records))
}
