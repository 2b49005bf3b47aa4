use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(gravmodes::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<gravmodes::Error> for CliError {
    fn from(e: gravmodes::Error) -> Self {
        use gravmodes::Error as E;
        match e {
            E::InvalidArgument { .. } | E::InvalidProfile { .. } | E::Amplitude(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
