use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] telefock::Error),
}

impl CliError {
    pub fn config(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Self::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// 2 for bad configuration or inputs, 3 for accuracy and convergence
    /// failures, 4 when the herald can never fire.
    pub fn exit_code(&self) -> i32 {
        use telefock::Error as E;
        match self {
            Self::Config { .. } => 2,
            Self::Io { .. } => 1,
            Self::Core(e) => match e {
                E::Accuracy(_) | E::Sampling(_) | E::Tomography(_) => 3,
                E::HeraldImpossible(_) => 4,
                E::Io(_) => 1,
                E::InvalidDimension(_)
                | E::Domain(_)
                | E::Shape(_)
                | E::Truncation(_)
                | E::NotPure(_)
                | E::InvalidState(_)
                | E::Parse { .. }
                | E::Json(_) => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
