//! Vibration schedule synthesis.
//!
//! A vibration on entry `(p, q)` of a linear system (the edge `q → p`) shifts
//! the averaged entry by `−a_qp·r²/2`, where `r = u/β` is its amplitude to
//! frequency ratio. Designs place one vibration per targeted entry, order them
//! along an acyclic modification pattern, and choose frequencies as square
//! roots of distinct primes so that cross-terms average out. Every design is
//! checked by numerical averaging before it is returned.

mod cluster;
mod error;
mod frequency;
mod kuramoto;
mod linear;
mod modifiable;

pub use cluster::{design_cluster, CertificateInputs, ClusterDesign, ClusterOutcome};
pub use error::{DesignError, Violation};
pub use frequency::{is_pool_value, pool_value_at_least, MAX_POOL_VALUE};
pub use kuramoto::{influence_map, kuramoto_modifiable, Combo, InfluenceMap, SlotClass, VibrationSlot};
pub use linear::{design_linear, DesignOptions, DesignedSlot, LinearDesign};
pub use modifiable::{modifiable_graph, validate_modification, ModifiableMode};
