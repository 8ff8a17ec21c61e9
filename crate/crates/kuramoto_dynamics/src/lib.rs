//! Kuramoto oscillator networks with edge vibrations.
//!
//! The model is `θ̇_i = ω_i + Σ_j (w_ij + v_ij(t)) sin(θ_j − θ_i)` with
//! `v_ij(t) = (u_ij/ε) sin(β_ij t/ε)`. Phases are integrated unwrapped.

mod benchmark;
mod bounds;
mod classify;
mod error;
mod linearize;
mod model;
mod schedule;
mod simulate;
mod sync;

pub use benchmark::{two_cluster_benchmark, BENCHMARK_ALPHA};
pub use bounds::{perturbation_bounds, PerturbationBounds, BOUND_SAFETY_FACTOR};
pub use classify::{
    classify_partial_stability, growing_mode_perturbation, perturbed_initial_states, run_ensemble,
    seeded_manifold_state,
    Classification, ClassifierOptions, Stability,
};
pub use error::DynamicsError;
pub use linearize::{
    cluster_forcing, incremental_field, influence_matrices, linearize, InterStructure,
    Linearization,
};
pub use model::KuramotoNetwork;
pub use schedule::{VibrationEntry, VibrationSchedule};
pub use simulate::{default_dt, default_horizon, simulate, Trajectory, MAX_SAMPLES};
pub use sync::{geodesic_distance, state_sync_error, sync_error, wrap_angle};
