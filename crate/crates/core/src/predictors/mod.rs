//! Channel predictors: sample-and-hold, per-antenna AR, and the recurrent
//! family (plain LSTM, LPCNet, JLPCNet) that share one network skeleton,
//! plus ZF beamforming, the training losses and the training loop.

mod classical;
mod config;
mod loss;
mod lpcnet;
mod model_io;
mod train;

pub use classical::{ar_predict, difference_preprocess, sh_predict, ArPrediction, AR_ORDER};
pub use config::{lpcnet_param_formula, LpcnetConfig};
pub use loss::{cosine_loss, nmse_loss, zf_beamform, LossEval};
pub use lpcnet::{dynamic_linear, dynamic_linear_backward, AdjusterMode, Features, LinearGrads, LpcNet, LpcTape};
pub use model_io::{read_model, write_model, ModelFile, Precision, MODEL_MAGIC, MODEL_VERSION};
pub use train::{evaluate_loss, predict_windows, train, TrainReport};

use thiserror::Error;

use crate::nn::NnError;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Sh,
    Ar,
    Lstm,
    Lpcnet,
    Jlpcnet,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::Sh, ModelKind::Ar, ModelKind::Lstm, ModelKind::Lpcnet, ModelKind::Jlpcnet];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sh => "SH",
            ModelKind::Ar => "AR",
            ModelKind::Lstm => "LSTM",
            ModelKind::Lpcnet => "LPCNet",
            ModelKind::Jlpcnet => "JLPCNet",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    /// Whether the model has trainable parameters.
    pub fn is_neural(self) -> bool {
        matches!(self, ModelKind::Lstm | ModelKind::Lpcnet | ModelKind::Jlpcnet)
    }

    /// Whether the output is a beamforming vector rather than CSI.
    pub fn predicts_beam(self) -> bool {
        self == ModelKind::Jlpcnet
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("invalid predictor configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("zero channel vector")]
    ZeroChannel,
    #[error("predicted beamforming vector is all zeros")]
    DegenerateDirection,
    #[error("non-finite loss at epoch {epoch}, batch {batch} (parameter norm {param_norm:.4e})")]
    NonFiniteLoss { epoch: usize, batch: usize, param_norm: f64 },
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
