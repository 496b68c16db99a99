use std::path::PathBuf;

use dendrite_core::chaos::ChaosError;
use dendrite_core::dendrite::DendriteError;
use dendrite_core::extension::ExtensionError;
use dendrite_core::odometer::OdometerError;
use dendrite_core::SpaceError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("unknown format {0:?} (expected dot or json)")]
    UnknownFormat(String),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Dendrite(#[from] DendriteError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Odometer(#[from] OdometerError),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
