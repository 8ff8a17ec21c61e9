//! Certificates for the stability of a cluster synchronization manifold.
//!
//! A certificate combines per-cluster averaged Jacobians, their Lyapunov
//! robustness, interconnection gains, and an M-matrix test. Simulation
//! evidence is attached alongside so that a stable-but-uncertified network is
//! reported as such rather than as a failure.

mod averaging;
mod certify;
mod error;
mod matrix_io;
mod smatrix;

pub use averaging::averaged_jacobians;
pub use certify::{
    certify, CertificateStatus, CertifyOptions, ClusterReport, EmpiricalOptions, EmpiricalReport,
    StabilityReport, SweepRow, Tolerances,
};
pub use error::CertError;
pub use matrix_io::{from_rows, to_rows};
pub use smatrix::{build_s, s_from_robustness, SMatrix};
