//! Non-stationary MIMO channel prediction workbench.
//!
//! * [`numerics`]: complex/real linear algebra, seeded streams, gradient oracle
//! * [`nn`]: LSTM, MLP, ADAM and checkpoints with exact reverse passes
//! * [`channel`]: geometric time-varying channel simulator and datasets
//! * [`predictors`]: SH, AR, LSTM, LPCNet, JLPCNet, ZF beamforming, training
//! * [`analysis`]: NMSE, cosine similarity, spectral efficiency, ADF test

pub mod numerics;
pub mod nn;
pub mod channel;
pub mod predictors;
pub mod analysis;
