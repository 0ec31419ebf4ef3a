use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or inconsistent configuration; exit code 1.
    #[error("configuration error: {0}")]
    Config(String),

    /// Anything that failed while running; exit code 2.
    #[error("{0}")]
    Runtime(String),

    #[error("missing artifact {0}; run the earlier stage first")]
    MissingArtifact(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::MissingArtifact(_) => 2,
        }
    }
}

impl From<eqlab_core::Error> for CliError {
    fn from(e: eqlab_core::Error) -> Self {
        match e {
            eqlab_core::Error::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
