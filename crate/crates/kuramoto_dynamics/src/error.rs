use graph_core::{GraphError, InvarianceViolation};
use linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid vibration schedule: {0}")]
    InvalidSchedule(String),
    #[error("step {dt:e} exceeds {max_dt:e}, the resolution limit for the fastest vibration")]
    StepTooCoarse { dt: f64, max_dt: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("cluster synchronization manifold is not invariant ({} violations)", .0.len())]
    InvarianceViolated(Vec<InvarianceViolation>),
}
