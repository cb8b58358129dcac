//! Command-line front end: dataset generation, ADF analysis, training,
//! evaluation and parameter counting, each writing a digest manifest next to
//! its outputs.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod report;

use chanforecast::analysis::AnalysisError;
use chanforecast::channel::ChannelError;
use chanforecast::nn::NnError;
use chanforecast::predictors::PredictorError;
use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::InvalidConfig(_) | ChannelError::TooShort { .. } | ChannelError::NoGeometry(_) => {
                CliError::Config(e.to_string())
            }
            ChannelError::Collision { .. } => CliError::Numeric(e.to_string()),
            ChannelError::Format(_) | ChannelError::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFinite(_) => CliError::Numeric(e.to_string()),
            NnError::Checkpoint(_) | NnError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PredictorError> for CliError {
    fn from(e: PredictorError) -> Self {
        match e {
            PredictorError::InvalidConfig(_) | PredictorError::Shape(_) => CliError::Config(e.to_string()),
            PredictorError::Format(_) | PredictorError::Io(_) => CliError::Io(e.to_string()),
            PredictorError::Nn(inner) => inner.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::TooShort { .. } | AnalysisError::InvalidArgument(_) | AnalysisError::LengthMismatch(..) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
