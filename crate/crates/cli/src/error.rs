use planvec_core::error::{FitError, GuidanceError, PipelineError, RasterError, SynthError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable input, bad flags or infeasible configuration.
    #[error("{0}")]
    Input(String),
    /// Candidate enumeration exceeded its cap.
    #[error("{0}")]
    TooDense(FitError),
    #[error("{0}")]
    Numeric(GuidanceError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::TooDense(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::TooDense(_) => Some("raise --snap-tol or --min-length, or check the input for heavy noise"),
            _ => None,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Fit(f @ FitError::TooDense { .. }) => CliError::TooDense(f),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<GuidanceError> for CliError {
    fn from(e: GuidanceError) -> Self {
        match e {
            GuidanceError::DivisionByZero { .. } | GuidanceError::NonFinite(_) => CliError::Numeric(e),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
