use std::f64::consts::TAU;

use nalgebra::DMatrix;

use crate::{max_abs, LinalgError};

/// Fixed-step integration must take at least this many steps per shortest forcing period.
pub const MIN_STEPS_PER_PERIOD: f64 = 40.0;

/// Steps per shortest period used when the caller does not pick `dt`.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 64.0;

/// Time-varying square matrix `P(t)` with known frequency content.
pub trait TimeMatrix {
    fn dim(&self) -> usize;
    fn eval_into(&self, t: f64, out: &mut DMatrix<f64>);
    /// Fastest angular frequency present; 0 for a constant matrix.
    fn max_frequency(&self) -> f64;
    /// Slowest nonzero angular frequency; 0 for a constant matrix.
    fn min_frequency(&self) -> f64;
    /// Upper bound on `‖P(t)‖_∞`, used to pick a default step; 0 if unknown.
    fn magnitude_bound(&self) -> f64 {
        0.0
    }

    fn eval(&self, t: f64) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        self.eval_into(t, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMatrix(pub DMatrix<f64>);

impl TimeMatrix for ConstantMatrix {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn eval_into(&self, _t: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.0);
    }
    fn max_frequency(&self) -> f64 {
        0.0
    }
    fn min_frequency(&self) -> f64 {
        0.0
    }
}

/// One term `amplitude · sin(frequency · t) · matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinusoidalTerm {
    pub matrix: DMatrix<f64>,
    pub amplitude: f64,
    pub frequency: f64,
}

/// Zero-mean sinusoidal forcing `P(t) = Σ u·sin(βt)·M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinusoidalMatrix {
    pub dim: usize,
    pub terms: Vec<SinusoidalTerm>,
}

impl SinusoidalMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn push(&mut self, matrix: DMatrix<f64>, amplitude: f64, frequency: f64) {
        assert_eq!(matrix.shape(), (self.dim, self.dim), "term shape");
        self.terms.push(SinusoidalTerm { matrix, amplitude, frequency });
    }

    /// Single-entry term: `P[row, col] += amplitude·sin(frequency·t)`.
    pub fn push_entry(&mut self, row: usize, col: usize, amplitude: f64, frequency: f64) {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        m[(row, col)] = 1.0;
        self.push(m, amplitude, frequency);
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.amplitude == 0.0 || t.matrix.iter().all(|&v| v == 0.0))
    }
}

impl TimeMatrix for SinusoidalMatrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval_into(&self, t: f64, out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for term in &self.terms {
            let s = term.amplitude * (term.frequency * t).sin();
            if s != 0.0 {
                *out += &term.matrix * s;
            }
        }
    }
    fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max)
    }
    fn magnitude_bound(&self) -> f64 {
        // Σ |a_k|·‖M_k‖_∞ with the row-sum norm.
        self.terms
            .iter()
            .map(|t| {
                let row_max = (0..t.matrix.nrows())
                    .map(|i| t.matrix.row(i).iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                t.amplitude.abs() * row_max
            })
            .sum()
    }
    fn min_frequency(&self) -> f64 {
        let slowest = self
            .terms
            .iter()
            .map(|t| t.frequency.abs())
            .filter(|&f| f > 0.0)
            .fold(f64::INFINITY, f64::min);
        if slowest.is_finite() {
            slowest
        } else {
            0.0
        }
    }
}

fn check_step(p: &dyn TimeMatrix, dt: f64) -> Result<(), LinalgError> {
    let f = p.max_frequency();
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(LinalgError::StepTooCoarse { dt, max_dt: 0.0 });
    }
    if f > 0.0 {
        let max_dt = TAU / (f * MIN_STEPS_PER_PERIOD);
        if dt > max_dt * (1.0 + 1e-12) {
            return Err(LinalgError::StepTooCoarse { dt, max_dt });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// `Φ(t1, t0)`.
    pub phi: DMatrix<f64>,
    /// `|ln|det Φ| − ∫tr P|`, a cheap integrator health check.
    pub log_det_error: f64,
    pub steps: usize,
}

/// Classical RK4 step for `Φ' = P(t)Φ` given `P` at t, t+h/2 and t+h.
fn rk4_left(
    phi: &DMatrix<f64>,
    p0: &DMatrix<f64>,
    pm: &DMatrix<f64>,
    p1: &DMatrix<f64>,
    h: f64,
) -> DMatrix<f64> {
    let k1 = p0 * phi;
    let k2 = pm * (phi + &k1 * (0.5 * h));
    let k3 = pm * (phi + &k2 * (0.5 * h));
    let k4 = p1 * (phi + &k3 * h);
    phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Exact inverse of the integrated transition matrix, so that `Φ⁻¹Φ = I`
/// holds to rounding and conjugation of `J` introduces no drift of its own.
fn invert(phi: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    phi.clone().try_inverse().ok_or(LinalgError::Singular)
}

/// State transition matrix of `x' = P(t)x` from `t0` to `t1` by fixed-step RK4.
///
/// The step actually used is `(t1 − t0)/N` with `N = ⌈|t1 − t0|/dt⌉`, so it
/// never exceeds `dt`.
pub fn state_transition(
    p: &dyn TimeMatrix,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Transition, LinalgError> {
    check_step(p, dt)?;
    let n = p.dim();
    let span = t1 - t0;
    let steps = (span.abs() / dt).ceil() as usize;
    let mut phi = DMatrix::<f64>::identity(n, n);
    if steps == 0 {
        return Ok(Transition { phi, log_det_error: 0.0, steps });
    }
    let h = span / steps as f64;
    let mut p0 = p.eval(t0);
    let mut pm = DMatrix::zeros(n, n);
    let mut p1 = DMatrix::zeros(n, n);
    let mut trace_integral = 0.0;
    for k in 0..steps {
        let t = t0 + h * k as f64;
        p.eval_into(t + 0.5 * h, &mut pm);
        p.eval_into(t + h, &mut p1);
        phi = rk4_left(&phi, &p0, &pm, &p1, h);
        trace_integral += h / 6.0 * (p0.trace() + 4.0 * pm.trace() + p1.trace());
        std::mem::swap(&mut p0, &mut p1);
    }
    let det = phi.determinant();
    let log_det_error = if det > 0.0 {
        (det.ln() - trace_integral).abs()
    } else {
        f64::INFINITY
    };
    Ok(Transition { phi, log_det_error, steps })
}

/// Walks the RK4 grid on `[0, horizon]`, handing `(t, Φ(t,0), Φ(t,0)⁻¹)` to
/// `visit` at every node including both ends. Returns the step used.
pub fn sample_transition(
    p: &dyn TimeMatrix,
    horizon: f64,
    dt: f64,
    mut visit: impl FnMut(f64, &DMatrix<f64>, &DMatrix<f64>),
) -> Result<f64, LinalgError> {
    check_step(p, dt)?;
    let n = p.dim();
    let steps = (horizon / dt).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let mut phi = DMatrix::<f64>::identity(n, n);
    let mut psi = DMatrix::<f64>::identity(n, n);
    let mut p0 = p.eval(0.0);
    let mut pm = DMatrix::zeros(n, n);
    let mut p1 = DMatrix::zeros(n, n);
    visit(0.0, &phi, &psi);
    for k in 0..steps {
        let t = h * k as f64;
        p.eval_into(t + 0.5 * h, &mut pm);
        p.eval_into(t + h, &mut p1);
        phi = rk4_left(&phi, &p0, &pm, &p1, h);
        psi = invert(&phi)?;
        std::mem::swap(&mut p0, &mut p1);
        visit(t + h, &phi, &psi);
    }
    Ok(h)
}

/// Default quadrature step: [`DEFAULT_STEPS_PER_PERIOD`] steps per period of
/// the fastest frequency, with `‖P‖` treated as a rate when it is larger.
pub fn default_step(p: &dyn TimeMatrix) -> f64 {
    TAU / (DEFAULT_STEPS_PER_PERIOD * p.max_frequency().max(p.magnitude_bound()))
}

/// Default averaging horizon: 200 periods of the slowest forcing frequency.
pub fn default_horizon(min_frequency: f64) -> f64 {
    200.0 * TAU / min_frequency
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageOptions {
    /// Quadrature horizon `T`; defaults to [`default_horizon`].
    pub horizon: Option<f64>,
    /// Integration step; defaults to [`default_step`].
    pub dt: Option<f64>,
    /// Maximum relative change between the `T` and `2T` results.
    pub relative_tolerance: f64,
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self { horizon: None, dt: None, relative_tolerance: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSystem {
    /// Average over `[0, T]`.
    pub jbar: DMatrix<f64>,
    /// Average over `[0, 2T]`, used for the convergence check.
    pub jbar_doubled: DMatrix<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub relative_change: f64,
}

/// Time average of `Φ⁻¹ J Φ` for the transition matrix of `x' = P(t)x`.
///
/// The transition matrix is normalized so that its time mean is the identity,
/// which makes every first-level entry the zero-mean primitive of its forcing.
/// Concretely, with `Φ₀ = Φ(t, 0)` and `C = (mean Φ₀)⁻¹` the result is
/// `C⁻¹ · mean(Φ₀⁻¹ J Φ₀) · C`. Means are trapezoidal over the RK4 grid.
pub fn conjugated_average(
    j: &DMatrix<f64>,
    p: &dyn TimeMatrix,
    opts: AverageOptions,
) -> Result<AveragedSystem, LinalgError> {
    let n = p.dim();
    if j.shape() != (n, n) {
        return Err(LinalgError::DimensionMismatch { expected: n, found: j.nrows() });
    }
    let f_max = p.max_frequency();
    if f_max == 0.0 {
        return Ok(AveragedSystem {
            jbar: j.clone(),
            jbar_doubled: j.clone(),
            horizon: 0.0,
            dt: 0.0,
            relative_change: 0.0,
        });
    }
    let horizon = opts.horizon.unwrap_or_else(|| default_horizon(p.min_frequency()));
    let requested_dt = opts.dt.unwrap_or_else(|| default_step(p));
    check_step(p, requested_dt)?;
    let steps = (horizon / requested_dt).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;

    let mut phi = DMatrix::<f64>::identity(n, n);
    let mut psi = DMatrix::<f64>::identity(n, n);
    let mut p0 = p.eval(0.0);
    let mut pm = DMatrix::zeros(n, n);
    let mut p1 = DMatrix::zeros(n, n);
    let first_map = j.clone();
    let mut sum_phi = DMatrix::<f64>::identity(n, n);
    let mut sum_map = first_map.clone();
    let mut at_horizon = None;
    for k in 0..2 * steps {
        let t = h * k as f64;
        p.eval_into(t + 0.5 * h, &mut pm);
        p.eval_into(t + h, &mut p1);
        phi = rk4_left(&phi, &p0, &pm, &p1, h);
        psi = invert(&phi)?;
        std::mem::swap(&mut p0, &mut p1);
        let map = &psi * j * &phi;
        sum_phi += &phi;
        sum_map += &map;
        if k + 1 == steps {
            at_horizon = Some(normalized_mean(
                &sum_phi, &sum_map, &first_map, &phi, &map, steps,
            )?);
        }
    }
    let jbar = at_horizon.expect("horizon reached");
    let last_map = &psi * j * &phi;
    let jbar_doubled =
        normalized_mean(&sum_phi, &sum_map, &first_map, &phi, &last_map, 2 * steps)?;
    let scale = max_abs(&jbar_doubled).max(f64::MIN_POSITIVE);
    let relative_change = max_abs(&(&jbar - &jbar_doubled)) / scale;
    if !(relative_change < opts.relative_tolerance) {
        return Err(LinalgError::HorizonTooShort {
            horizon,
            relative_change,
            tolerance: opts.relative_tolerance,
        });
    }
    Ok(AveragedSystem { jbar, jbar_doubled, horizon, dt: h, relative_change })
}

/// Trapezoidal means from running sums over samples `0..=steps`, then the
/// mean-identity normalization.
fn normalized_mean(
    sum_phi: &DMatrix<f64>,
    sum_map: &DMatrix<f64>,
    first_map: &DMatrix<f64>,
    last_phi: &DMatrix<f64>,
    last_map: &DMatrix<f64>,
    steps: usize,
) -> Result<DMatrix<f64>, LinalgError> {
    let n = last_phi.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let inv_steps = 1.0 / steps as f64;
    let mean_phi = (sum_phi - (&id + last_phi) * 0.5) * inv_steps;
    let mean_map = (sum_map - (first_map + last_map) * 0.5) * inv_steps;
    let mean_inv = mean_phi.clone().try_inverse().ok_or(LinalgError::Singular)?;
    Ok(&mean_phi * mean_map * mean_inv)
}
