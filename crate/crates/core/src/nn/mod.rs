//! Differentiable building blocks with hand-written reverse passes: a batched
//! LSTM, a one-hidden-layer ReLU MLP, the flat parameter store, ADAM and the
//! binary checkpoint format.
//!
//! Every layer is generic over [`Real`] so training can run in `f32` while the
//! gradient checks run in `f64`.

mod adam;
mod checkpoint;
mod lstm;
mod mlp;
mod params;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use lstm::{lstm_step, lstm_step_backward, Lstm, LstmState, LstmTape};
pub use mlp::{relu, Mlp2, Mlp2Tape};
pub use params::{init_params, GradsMut, Init, ParamId, ParamInit, ParamSpec, ParamStore, Values};

use thiserror::Error;

/// Floating-point element type usable by the layers.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn of(x: f64) -> Self;
    fn to_f64_lossless(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch for {what}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        what: String,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("duplicate parameter name {0:?}")]
    DuplicateName(String),
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[inline]
pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}
