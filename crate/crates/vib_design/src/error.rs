use std::fmt;

use graph_core::GraphError;
use kuramoto_dynamics::DynamicsError;
use linalg::LinalgError;
use stability_cert::CertError;
use thiserror::Error;

/// One reason a modification matrix cannot be realized.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ShapeMismatch { expected: usize, found: usize },
    DiagonalEntry { index: usize },
    /// The entry's edge is not in the modifiable (or realizable) graph.
    NotModifiable { row: usize, col: usize },
    /// The entry has the wrong sign for its edge.
    SignMismatch { row: usize, col: usize, allowed: i8 },
    Cycle { nodes: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ShapeMismatch { expected, found } => write!(f, "expected a {expected}x{expected} matrix, found {found} rows"),
            Self::DiagonalEntry { index } => write!(f, "diagonal entry ({index}, {index}) is nonzero"),
            Self::NotModifiable { row, col } => write!(f, "entry ({row}, {col}) cannot be modified"),
            Self::SignMismatch { row, col, allowed } => {
                let dir = if *allowed > 0 { "increased" } else { "decreased" };
                write!(f, "entry ({row}, {col}) can only be {dir}")
            }
            Self::Cycle { nodes } => write!(f, "modification pattern has a cycle through {nodes:?}"),
        }
    }
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("modification is not realizable: {}", list(.0))]
    Violations(Vec<Violation>),
    #[error("modification is not realizable: {0}")]
    NotRealizable(String),
    #[error("cluster {cluster} has no realizable entries")]
    NoRealizableEdges { cluster: usize },
    #[error("design verification failed: averaged residual {residual:e} exceeds {tolerance:e}")]
    VerificationFailed { residual: f64, tolerance: f64 },
    #[error("invalid design request: {0}")]
    InvalidSpec(String),
}

impl DesignError {
    /// Realizability failures, as opposed to numerical or input errors.
    pub fn is_not_realizable(&self) -> bool {
        matches!(self, Self::Violations(_) | Self::NotRealizable(_) | Self::NoRealizableEdges { .. })
    }
}
