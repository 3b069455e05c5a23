use thiserror::Error;

/// Failure classes, one per process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<conflict_min::Error> for CliError {
    fn from(e: conflict_min::Error) -> Self {
        use conflict_min::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) | E::Parse { .. } | E::NoUsableEdges | E::InvalidGraph(_) => CliError::Data(msg),
            E::NotConverged { .. } => CliError::Numerical(msg),
            E::InvalidArgument(_) | E::OracleTooLarge { .. } | E::BudgetExceeded { .. } => {
                CliError::Usage(msg)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
