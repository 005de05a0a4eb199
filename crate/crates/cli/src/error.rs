use std::path::{Path, PathBuf};

use alterlda_core::classify::ClassifyError;
use alterlda_core::config::ConfigError;
use alterlda_core::corpus::IngestError;
use alterlda_core::eval::EvalError;
use alterlda_core::model::ModelError;
use alterlda_core::synth::SynthError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{message}")]
    Module {
        module: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Module { module, .. } => module,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "io" => 3,
            "ingest" => 4,
            "classify" => 5,
            "model" => 6,
            "eval" => 7,
            "synth" => 8,
            _ => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }
}

macro_rules! module_error {
    ($ty:ty, $name:literal) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Module {
                    module: $name,
                    message: e.to_string(),
                }
            }
        }
    };
}

module_error!(IngestError, "ingest");
module_error!(ClassifyError, "classify");
module_error!(ModelError, "model");
module_error!(EvalError, "eval");
module_error!(SynthError, "synth");

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Fails with an I/O error naming `path` when it does not exist.
pub fn require_exists(path: &Path) -> Result<(), CliError> {
    match std::fs::metadata(path) {
        Ok(_) => Ok(()),
        Err(e) => Err(CliError::io(path, e)),
    }
}
