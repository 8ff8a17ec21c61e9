//! Small dense numerical kernels.
//!
//! Everything here works on `nalgebra::DMatrix<f64>` and is sized for
//! desk-scale problems (tens of rows, not thousands).

mod error;
mod lyapunov;
mod pinv;
mod spectral;
mod transition;
pub mod trig;

pub use error::LinalgError;
pub use lyapunov::{robustness, solve_lyapunov, RobustnessValue, LYAPUNOV_RESIDUAL_BOUND};
pub use pinv::{pseudo_inverse, PINV_RELATIVE_CUTOFF};
pub use spectral::{
    eigenvalues, is_hurwitz, is_m_matrix, leading_principal_minors, max_real_eigenvalue,
    HURWITZ_MARGIN,
};
pub use transition::{
    conjugated_average, default_horizon, default_step, sample_transition, state_transition, AverageOptions, AveragedSystem,
    ConstantMatrix, SinusoidalMatrix, SinusoidalTerm, TimeMatrix, Transition,
    DEFAULT_STEPS_PER_PERIOD, MIN_STEPS_PER_PERIOD,
};

pub use nalgebra::DMatrix;

/// Largest absolute entry of a matrix (0 for an empty matrix).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
