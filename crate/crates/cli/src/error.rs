use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed configuration.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("schema error: {0}")]
    Schema(String),
    /// Rejected parameter values.
    #[error("invalid input: {0}")]
    Input(twistlab_core::Error),
    /// Numerical or invariant failure during the run.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema(_) | CliError::Input(_) => 2,
            CliError::Numeric(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<twistlab_core::Error> for CliError {
    fn from(e: twistlab_core::Error) -> Self {
        use twistlab_core::Error as E;
        match e {
            E::InvariantViolation { .. }
            | E::RootNotBracketed { .. }
            | E::EllipseModelInvalid { .. }
            | E::SingularCosine(_)
            | E::Infeasible { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Input(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
