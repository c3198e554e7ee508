use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: field `{field}`: {source}")]
    Parse {
        path: PathBuf,
        field: String,
        source: serde_json::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] charged_drops::Error),

    /// The run finished and its outputs were written, but it did not reach
    /// its target.
    #[error("{0}")]
    Incomplete(String, Code),
}

/// Process exit codes; stable across versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Input = 2,
    Numerical = 3,
    Budget = 4,
}

impl CliError {
    pub fn code(&self) -> Code {
        use charged_drops::Error as E;
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Usage(_) => Code::Input,
            // an unwritable output path is a bad argument
            CliError::Write { .. } => Code::Input,
            CliError::Core(E::InvalidInput(_) | E::NotAGraph { .. }) => Code::Input,
            CliError::Core(E::Quadrature { .. } | E::NoConvergence(_)) => Code::Numerical,
            CliError::Core(E::BudgetExhausted(_)) => Code::Budget,
            CliError::Incomplete(_, c) => *c,
        }
    }
}
