use thiserror::Error;

use kuramoto_dynamics::DynamicsError;
use stability_cert::CertError;
use vib_design::DesignError;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::NotRealizable(_) => 3,
            Self::VerificationFailed(_) => 4,
            Self::Compute(_) | Self::Io(_) => 1,
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::VerificationFailed { .. } => Self::VerificationFailed(e.to_string()),
            DesignError::InvalidSpec(_) => Self::Validation(e.to_string()),
            e if e.is_not_realizable() => Self::NotRealizable(e.to_string()),
            e => Self::Compute(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Graph(_)
            | DynamicsError::InvalidModel(_)
            | DynamicsError::InvalidSchedule(_)
            | DynamicsError::InvarianceViolated(_)
            | DynamicsError::StepTooCoarse { .. } => Self::Validation(e.to_string()),
            e => Self::Compute(e.to_string()),
        }
    }
}

impl From<CertError> for CliError {
    fn from(e: CertError) -> Self {
        match e {
            CertError::Dynamics(d) => d.into(),
            CertError::Invalid(m) => Self::Validation(m),
            e => Self::Compute(e.to_string()),
        }
    }
}
