use super::ChannelError;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    LosLike,
    NlosLike,
}

impl ScenarioKind {
    pub fn id(self) -> u64 {
        match self {
            ScenarioKind::LosLike => 0,
            ScenarioKind::NlosLike => 1,
        }
    }

    pub fn from_id(id: u64) -> Option<Self> {
        match id {
            0 => Some(ScenarioKind::LosLike),
            1 => Some(ScenarioKind::NlosLike),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LosLike => "LOS",
            ScenarioKind::NlosLike => "NLOS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LOS" | "UMA-LOS" | "LOS-LIKE" => Some(ScenarioKind::LosLike),
            "NLOS" | "UMA-NLOS" | "NLOS-LIKE" => Some(ScenarioKind::NlosLike),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackKind {
    Linear,
    /// Constant-radius circle; the travel azimuth advances by `v·T_s/radius`
    /// per snapshot.
    Circular { radius_m: f64 },
}

/// UE speed for a dataset: one value, or a range swept at equal intervals
/// across trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedSetting {
    FixedKmh(f64),
    RangeKmh { low: f64, high: f64 },
}

impl SpeedSetting {
    /// Speed of trajectory `index` out of `count`, in m/s.
    pub fn speed_mps(&self, index: usize, count: usize) -> f64 {
        let kmh = match *self {
            SpeedSetting::FixedKmh(v) => v,
            SpeedSetting::RangeKmh { low, high } => {
                if count <= 1 {
                    low
                } else {
                    low + (high - low) * index as f64 / (count - 1) as f64
                }
            }
        };
        kmh / 3.6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Frozen path parameters with the linear Doppler phase.
    Static,
    /// Exact per-snapshot geometry.
    Drifting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n_paths: usize,
    pub carrier_hz: f64,
    pub n_l: usize,
    pub n_r: usize,
    pub polarization_deg: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub k_factor_db: f64,
    pub pdp_decay_db: f64,
    /// Per-path log-normal power spread around the delay profile.
    pub shadowing_db: f64,
    pub xpd_db: f64,
    pub srs_period_s: f64,
    pub track: TrackKind,
    pub speed: SpeedSetting,
    pub snapshots: usize,
    pub mode: ChannelMode,
    pub scatter_radius_m: (f64, f64),
    pub scatter_height_m: (f64, f64),
    pub ue_distance_m: (f64, f64),
    pub seed: u64,
}

impl ScenarioConfig {
    fn base(kind: ScenarioKind, n_paths: usize) -> Self {
        Self {
            kind,
            n_paths,
            carrier_hz: 3.5e9,
            n_l: 4,
            n_r: 4,
            polarization_deg: 45.0,
            bs_height_m: 25.0,
            ue_height_m: 1.5,
            k_factor_db: 10.0,
            pdp_decay_db: 20.0,
            shadowing_db: 3.0,
            xpd_db: 8.0,
            srs_period_s: 2e-3,
            track: TrackKind::Linear,
            speed: SpeedSetting::FixedKmh(60.0),
            snapshots: 700,
            mode: ChannelMode::Drifting,
            scatter_radius_m: (20.0, 200.0),
            scatter_height_m: (1.5, 30.0),
            ue_distance_m: (50.0, 250.0),
            seed: 0,
        }
    }

    /// Line-of-sight preset: 12 paths, one of them direct.
    pub fn los() -> Self {
        Self::base(ScenarioKind::LosLike, 12)
    }

    /// Non-line-of-sight preset: 21 scattered paths.
    pub fn nlos() -> Self {
        Self::base(ScenarioKind::NlosLike, 21)
    }

    pub fn preset(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::LosLike => Self::los(),
            ScenarioKind::NlosLike => Self::nlos(),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn element_spacing(&self) -> f64 {
        self.wavelength() / 2.0
    }

    /// Number of BS antenna elements, two polarizations per grid point.
    pub fn n_b(&self) -> usize {
        2 * self.n_l * self.n_r
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |m: &str| Err(ChannelError::InvalidConfig(m.to_string()));
        if self.n_paths == 0 {
            return bad("at least one path required");
        }
        if self.kind == ScenarioKind::LosLike && self.n_paths < 2 {
            return bad("LOS scenario needs a direct path plus at least one scatterer");
        }
        if !(self.carrier_hz > 0.0) || !(self.srs_period_s > 0.0) {
            return bad("carrier frequency and SRS period must be positive");
        }
        if self.n_l == 0 || self.n_r == 0 {
            return bad("array dimensions must be positive");
        }
        if self.snapshots < 2 {
            return bad("trajectory needs at least two snapshots");
        }
        let (r0, r1) = self.scatter_radius_m;
        let (h0, h1) = self.scatter_height_m;
        let (d0, d1) = self.ue_distance_m;
        if !(0.0 <= r0 && r0 < r1) || !(h0 <= h1) || !(0.0 < d0 && d0 <= d1) {
            return bad("geometry ranges must be ordered and positive");
        }
        if let TrackKind::Circular { radius_m } = self.track {
            if !(radius_m > 0.0) {
                return bad("circular track radius must be positive");
            }
        }
        match self.speed {
            SpeedSetting::FixedKmh(v) if v < 0.0 => bad("speed must be non-negative"),
            SpeedSetting::RangeKmh { low, high } if low < 0.0 || high < low => bad("speed range must be ordered"),
            _ => Ok(()),
        }
    }
}
