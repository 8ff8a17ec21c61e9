use std::f64::consts::TAU;
use std::io::Write;

use graph_core::{ClusterPartition, IncidenceSet};
use nalgebra::DVector;

use crate::sync::{state_sync_error, wrap_angle};
use crate::{DynamicsError, KuramotoNetwork, VibrationSchedule};

/// Upper bound on retained trajectory samples.
pub const MAX_SAMPLES: usize = 100_000;

/// Steps per shortest vibration period used by [`default_dt`].
const DEFAULT_STEPS_PER_VIBRATION: f64 = 50.0;
/// Coarsest accepted resolution of the fastest vibration.
const MIN_STEPS_PER_VIBRATION: f64 = 40.0;
/// Steps per characteristic period of the autonomous field.
const STEPS_PER_NATURAL_PERIOD: f64 = 200.0;

/// Sampled solution. Phases are stored unwrapped; see [`Trajectory::wrapped`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    /// Integration step actually used.
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.theta.last().expect("trajectory has at least one sample")
    }

    /// Phases wrapped into `[0, 2π)`.
    pub fn wrapped(&self) -> Vec<Vec<f64>> {
        self.theta
            .iter()
            .map(|th| th.iter().map(|v| v.rem_euclid(TAU)).collect())
            .collect()
    }

    /// Incremental coordinates `(x, y) = (B̂_intraᵀθ, B̂_interᵀθ)` on unwrapped phases.
    pub fn coordinates(&self, inc: &IncidenceSet) -> Vec<(DVector<f64>, DVector<f64>)> {
        let (bi, be) = (inc.b_hat_intra(), inc.b_hat_inter());
        self.theta
            .iter()
            .map(|th| {
                let th = DVector::from_column_slice(th);
                (bi.tr_mul(&th), be.tr_mul(&th))
            })
            .collect()
    }

    /// `‖x‖` with every tree difference wrapped into `(−π, π]`.
    pub fn wrapped_x_norms(&self, inc: &IncidenceSet) -> Vec<f64> {
        let tree = &inc.tree[..inc.n_intra_tree()];
        self.theta
            .iter()
            .map(|th| {
                tree.iter()
                    .map(|&(s, t)| wrap_angle(th[t] - th[s]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Writes `t,theta_1..theta_n,err` rows with wrapped phases.
    pub fn write_csv<W: Write>(
        &self,
        out: W,
        partition: &ClusterPartition,
    ) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.theta.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("theta_{i}")));
        header.push("err".to_string());
        w.write_record(&header)?;
        for (t, th) in self.times.iter().zip(&self.theta) {
            let mut row = Vec::with_capacity(n + 2);
            row.push(t.to_string());
            row.extend(th.iter().map(|v| v.rem_euclid(TAU).to_string()));
            row.push(state_sync_error(th, partition).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default step: 50 per shortest vibration period, and never coarser than
/// 1/200 of the period set by the fastest autonomous rate.
pub fn default_dt(kn: &KuramotoNetwork, sched: Option<&VibrationSchedule>) -> f64 {
    let omega_max = kn.omega.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
    let w = kn.net.adjacency();
    let row_max = (0..w.nrows()).map(|i| w.row(i).sum()).fold(0.0_f64, f64::max);
    let f = (omega_max + row_max).max(1e-12);
    let mut dt = TAU / (STEPS_PER_NATURAL_PERIOD * f);
    if let Some(period) = sched.and_then(VibrationSchedule::shortest_period) {
        dt = dt.min(period / DEFAULT_STEPS_PER_VIBRATION);
    }
    dt
}

/// Horizon for stabilization runs: `200/|rate|`, capped at 500.
pub fn default_horizon(slowest_rate: f64) -> f64 {
    if slowest_rate == 0.0 || !slowest_rate.is_finite() {
        return 500.0;
    }
    (200.0 / slowest_rate.abs()).min(500.0)
}

struct Field {
    omega: Vec<f64>,
    /// `(source, target, weight)` for every edge.
    edges: Vec<(usize, usize, f64)>,
    /// `(edge index, amplitude/ε, frequency/ε)`.
    vib: Vec<(usize, f64, f64)>,
    sin: Vec<f64>,
    cos: Vec<f64>,
    gain: Vec<f64>,
}

impl Field {
    fn new(kn: &KuramotoNetwork, sched: Option<&VibrationSchedule>) -> Self {
        let edges: Vec<_> = kn.net.edges().iter().map(|e| (e.source, e.target, e.weight)).collect();
        let vib = sched
            .map(|s| {
                s.entries
                    .iter()
                    .map(|v| {
                        let idx = kn.net.edge_index(v.source, v.target).expect("validated edge");
                        (idx, v.amplitude / s.epsilon, v.frequency / s.epsilon)
                    })
                    .collect()
            })
            .unwrap_or_default();
        let n = kn.n();
        let gain = edges.iter().map(|e| e.2).collect();
        Self { omega: kn.omega.clone(), edges, vib, sin: vec![0.0; n], cos: vec![0.0; n], gain }
    }

    fn eval(&mut self, t: f64, theta: &[f64], out: &mut [f64]) {
        for (i, th) in theta.iter().enumerate() {
            let (s, c) = th.sin_cos();
            self.sin[i] = s;
            self.cos[i] = c;
        }
        for &(idx, a, b) in &self.vib {
            self.gain[idx] = self.edges[idx].2 + a * (b * t).sin();
        }
        out.copy_from_slice(&self.omega);
        for (&(s, t, _), g) in self.edges.iter().zip(&self.gain) {
            // sin(θ_s − θ_t)
            let d = self.sin[s] * self.cos[t] - self.cos[s] * self.sin[t];
            out[t] += g * d;
        }
    }
}

/// Integrates the (optionally vibrated) network from `theta0` over `[0, t_end]`
/// with fixed-step RK4.
pub fn simulate(
    kn: &KuramotoNetwork,
    sched: Option<&VibrationSchedule>,
    theta0: &[f64],
    t_end: f64,
    dt: Option<f64>,
) -> Result<Trajectory, DynamicsError> {
    let n = kn.n();
    if theta0.len() != n {
        return Err(DynamicsError::InvalidModel(format!(
            "theta0 has {} entries for {n} nodes",
            theta0.len()
        )));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(DynamicsError::InvalidModel(format!("t_end {t_end} must be finite and nonnegative")));
    }
    if let Some(s) = sched {
        s.validate(kn)?;
    }
    let requested = dt.unwrap_or_else(|| default_dt(kn, sched));
    if !(requested > 0.0) || !requested.is_finite() {
        return Err(DynamicsError::StepTooCoarse { dt: requested, max_dt: 0.0 });
    }
    if let Some(period) = sched.and_then(VibrationSchedule::shortest_period) {
        let max_dt = period / MIN_STEPS_PER_VIBRATION;
        if requested > max_dt * (1.0 + 1e-12) {
            return Err(DynamicsError::StepTooCoarse { dt: requested, max_dt });
        }
    }
    let steps = (t_end / requested).ceil() as usize;
    let h = if steps == 0 { requested } else { t_end / steps as f64 };
    let stride = steps.div_ceil(MAX_SAMPLES - 1).max(1);

    let mut field = Field::new(kn, sched);
    let mut theta = theta0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut times = vec![0.0];
    let mut samples = vec![theta.clone()];
    for step in 0..steps {
        let t = h * step as f64;
        field.eval(t, &theta, &mut k1);
        for i in 0..n {
            tmp[i] = theta[i] + 0.5 * h * k1[i];
        }
        field.eval(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = theta[i] + 0.5 * h * k2[i];
        }
        field.eval(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = theta[i] + h * k3[i];
        }
        field.eval(t + h, &tmp, &mut k4);
        for i in 0..n {
            theta[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let done = step + 1;
        if done % stride == 0 || done == steps {
            if theta.iter().any(|v| !v.is_finite()) {
                return Err(DynamicsError::NonFiniteState { t: h * done as f64 });
            }
            times.push(h * done as f64);
            samples.push(theta.clone());
        }
    }
    Ok(Trajectory { times, theta: samples, dt: h })
}
