use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hurwitz (max real eigenvalue part {max_real:e})")]
    NotHurwitz { max_real: f64 },
    #[error("linear system is singular")]
    Singular,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("step {dt:e} exceeds the resolution limit {max_dt:e} for the fastest forcing frequency")]
    StepTooCoarse { dt: f64, max_dt: f64 },
    #[error("averaging horizon {horizon} too short: doubling changed the result by {relative_change:e} (tolerance {tolerance:e})")]
    HorizonTooShort {
        horizon: f64,
        relative_change: f64,
        tolerance: f64,
    },
    #[error("forcing matrix is not nilpotent; closed-form averaging needs a strictly triangular pattern")]
    NotNilpotent,
    #[error("frequency combination vanishes; the primitive would grow secularly")]
    Secular,
}
