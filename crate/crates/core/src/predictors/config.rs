use super::PredictorError;
use crate::nn::{Lstm, Mlp2};

/// Architecture, feature flags and optimizer settings of the recurrent
/// predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcnetConfig {
    /// Antenna count; network inputs and outputs have width `2·n_b`.
    pub n_b: usize,
    pub k: usize,
    pub n_z: usize,
    /// Hidden width of the weight-adjusting MLP.
    pub n_w: usize,
    /// Hidden width of the bias-adjusting MLP.
    pub n_s: usize,
    /// Prediction lead in SRS periods.
    pub horizon: usize,
    /// First-order differencing of the input sequence.
    pub enable_diff: bool,
    /// Hypernetwork modulation of the readout.
    pub enable_adjuster: bool,
    /// Adds the last observed snapshot to the readout.
    pub enable_residual: bool,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Scale of the adjuster output-layer weights at initialization.
    pub adjuster_init_scale: f64,
    /// Rotate each antenna of a training window by its own random phase and
    /// apply a random Doppler ramp common to all antennas.
    pub augment: bool,
    /// Largest Doppler ramp of the augmentation, radians per step.
    pub augment_doppler: f64,
}

impl LpcnetConfig {
    /// `K = 15`, `N_z = 256`, `N_w = N_s = 64`, learning rate 1e-4, batch 200,
    /// 1000 epochs, all modules enabled, one-step horizon.
    pub fn full_scale(n_b: usize) -> Self {
        Self {
            n_b,
            k: 15,
            n_z: 256,
            n_w: 64,
            n_s: 64,
            horizon: 1,
            enable_diff: true,
            enable_adjuster: true,
            enable_residual: true,
            lr: 1e-4,
            batch_size: 200,
            epochs: 1000,
            adjuster_init_scale: 0.01,
            augment: false,
            augment_doppler: 0.5,
        }
    }

    /// Same widths with every module switched off: raw input, static
    /// readout, no residual.
    pub fn lstm_baseline(mut self) -> Self {
        self.enable_diff = false;
        self.enable_adjuster = false;
        self.enable_residual = false;
        self
    }

    /// Beamformer variant: everything enabled except the residual, since the
    /// output is a beam direction rather than CSI.
    pub fn jlpcnet(mut self) -> Self {
        self.enable_diff = true;
        self.enable_adjuster = true;
        self.enable_residual = false;
        self
    }

    /// Flags of one cell of the preprocessor/adjuster ablation. The residual
    /// follows the preprocessor, since it restores the level removed by
    /// differencing.
    pub fn ablation(mut self, diff: bool, adjuster: bool) -> Self {
        self.enable_diff = diff;
        self.enable_adjuster = adjuster;
        self.enable_residual = diff;
        self
    }

    /// Length of the sequence seen by the LSTM, and the adjuster input width
    /// `N_i`: `K − 1` with differencing, `K` without.
    pub fn n_i(&self) -> usize {
        if self.enable_diff {
            self.k - 1
        } else {
            self.k
        }
    }

    pub fn validate(&self) -> Result<(), PredictorError> {
        let bad = |m: String| Err(PredictorError::InvalidConfig(m));
        if self.k < 2 {
            return bad(format!("K must be at least 2, got {}", self.k));
        }
        if self.horizon < 1 {
            return bad("horizon must be at least 1".into());
        }
        for (name, v) in [("N_b", self.n_b), ("N_z", self.n_z), ("N_w", self.n_w), ("N_s", self.n_s), ("batch size", self.batch_size)] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        Ok(())
    }

    /// Parameter count of the network these flags build.
    pub fn param_count(&self) -> usize {
        let base = Lstm::param_count(2 * self.n_b, self.n_z) + 2 * self.n_b * self.n_z + 2 * self.n_b;
        if self.enable_adjuster {
            base + Mlp2::param_count(self.n_i(), self.n_w, self.n_z) + Mlp2::param_count(self.n_i(), self.n_s, 1)
        } else {
            base
        }
    }

    /// Report label of this flag combination.
    pub fn variant_label(&self) -> &'static str {
        match (self.enable_diff, self.enable_adjuster) {
            (true, true) => "C+J",
            (true, false) => "only C",
            (false, true) => "only J",
            (false, false) => "without C and J",
        }
    }
}

/// Closed-form LPCNet parameter count
/// `10·N_b·N_z + 4·N_z² + N_i·N_s + N_i·N_w + N_w·N_z + 5·N_z + 2·N_b + 2·N_s + N_w + 1`.
pub fn lpcnet_param_formula(n_b: usize, n_z: usize, n_i: usize, n_w: usize, n_s: usize) -> usize {
    10 * n_b * n_z + 4 * n_z * n_z + n_i * n_s + n_i * n_w + n_w * n_z + 5 * n_z + 2 * n_b + 2 * n_s + n_w + 1
}
