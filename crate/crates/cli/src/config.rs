//! Experiment configuration: flat `key = value` lines under `[scenario]`,
//! `[dataset]` and `[model]` headers. `#` and `;` start comments.
//!
//! Keys are matched case-insensitively with runs of whitespace collapsed.
//! Every table parameter is accepted under its full name and its symbol,
//! e.g. `Number of neurons of LSTM` or `N_z`. Values may carry units
//! (`3.5GHz`, `2ms`, `25m`, `60km/h`, `±45°`).

use std::collections::BTreeMap;

use chanforecast::channel::{ChannelMode, ScenarioConfig, ScenarioKind, SpeedSetting, TrackKind};
use chanforecast::predictors::{LpcnetConfig, ModelKind};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub n_traj: usize,
    pub split_ratio: f64,
    /// Dataset horizons in SRS periods.
    pub horizons: Vec<usize>,
    pub kind: ModelKind,
    /// Model settings; `horizon` is the training horizon.
    pub model: LpcnetConfig,
    pub seed: u64,
}

type Setter = fn(&mut ExperimentConfig, &str) -> Result<(), String>;

struct Key {
    section: &'static str,
    names: &'static [&'static str],
    set: Setter,
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("not a number: {v:?}"))
}

/// Number with an optional unit suffix, scaled to the base unit of `dim`.
fn quantity(v: &str, dim: &str) -> Result<f64, String> {
    let s = v.trim().trim_start_matches('±').trim_end_matches('°').replace(' ', "");
    let lower = s.to_ascii_lowercase();
    let units: &[(&str, f64)] = match dim {
        "Hz" => &[("ghz", 1e9), ("mhz", 1e6), ("khz", 1e3), ("hz", 1.0)],
        "s" => &[("ms", 1e-3), ("us", 1e-6), ("s", 1.0)],
        "m" => &[("km", 1e3), ("cm", 1e-2), ("m", 1.0)],
        "km/h" => &[("km/h", 1.0), ("kmh", 1.0), ("m/s", 3.6)],
        "dB" => &[("db", 1.0)],
        _ => &[],
    };
    for (suffix, scale) in units {
        if let Some(n) = lower.strip_suffix(suffix) {
            return Ok(num::<f64>(n)? * scale);
        }
    }
    num(&lower)
}

fn boolean(v: &str) -> Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("not a boolean: {v:?}")),
    }
}

fn pair(v: &str, dim: &str) -> Result<(f64, f64), String> {
    let (a, b) = v.split_once(['-', ',']).ok_or_else(|| format!("expected a range low-high, got {v:?}"))?;
    Ok((quantity(a, dim)?, quantity(b, dim)?))
}

fn speed(v: &str) -> Result<SpeedSetting, String> {
    match v.trim().split_once(['-', ',']) {
        Some((a, b)) => Ok(SpeedSetting::RangeKmh {
            low: quantity(a, "km/h")?,
            high: quantity(b, "km/h")?,
        }),
        None => Ok(SpeedSetting::FixedKmh(quantity(v, "km/h")?)),
    }
}

/// Apply the preset of the named scenario while keeping other overrides:
/// only the kind, path count and K-factor follow the preset.
fn set_scenario(c: &mut ExperimentConfig, v: &str) -> Result<(), String> {
    let kind = ScenarioKind::parse(v.trim()).ok_or_else(|| format!("unknown scenario {v:?}"))?;
    let preset = ScenarioConfig::preset(kind);
    c.scenario.kind = kind;
    c.scenario.n_paths = preset.n_paths;
    Ok(())
}

const KEYS: &[Key] = &[
    Key { section: "scenario", names: &["communication scenarios", "scenario"], set: set_scenario },
    Key { section: "scenario", names: &["number of paths", "l"], set: |c, v| Ok(c.scenario.n_paths = num(v)?) },
    Key { section: "scenario", names: &["communication frequency", "f"], set: |c, v| Ok(c.scenario.carrier_hz = quantity(v, "Hz")?) },
    Key { section: "scenario", names: &["number of antennas in a column", "n_l"], set: |c, v| Ok(c.scenario.n_l = num(v)?) },
    Key { section: "scenario", names: &["number of antennas in a row", "n_r"], set: |c, v| Ok(c.scenario.n_r = num(v)?) },
    Key { section: "scenario", names: &["polarization angles"], set: |c, v| Ok(c.scenario.polarization_deg = quantity(v, "")?) },
    Key { section: "scenario", names: &["bs height"], set: |c, v| Ok(c.scenario.bs_height_m = quantity(v, "m")?) },
    Key { section: "scenario", names: &["ue height"], set: |c, v| Ok(c.scenario.ue_height_m = quantity(v, "m")?) },
    Key {
        section: "scenario",
        names: &["ue trajectory", "track"],
        set: |c, v| {
            let l = v.to_ascii_lowercase();
            c.scenario.track = if l.contains("linear") {
                TrackKind::Linear
            } else if l.contains("circular") {
                let radius_m = match c.scenario.track {
                    TrackKind::Circular { radius_m } => radius_m,
                    TrackKind::Linear => 20.0,
                };
                TrackKind::Circular { radius_m }
            } else {
                return Err(format!("unknown track {v:?}"));
            };
            Ok(())
        },
    },
    Key {
        section: "scenario",
        names: &["circle radius"],
        set: |c, v| {
            c.scenario.track = TrackKind::Circular { radius_m: quantity(v, "m")? };
            Ok(())
        },
    },
    Key { section: "scenario", names: &["period of srs", "t_s"], set: |c, v| Ok(c.scenario.srs_period_s = quantity(v, "s")?) },
    Key { section: "scenario", names: &["k-factor"], set: |c, v| Ok(c.scenario.k_factor_db = quantity(v, "dB")?) },
    Key { section: "scenario", names: &["pdp decay"], set: |c, v| Ok(c.scenario.pdp_decay_db = quantity(v, "dB")?) },
    Key { section: "scenario", names: &["shadowing"], set: |c, v| Ok(c.scenario.shadowing_db = quantity(v, "dB")?) },
    Key { section: "scenario", names: &["xpd"], set: |c, v| Ok(c.scenario.xpd_db = quantity(v, "dB")?) },
    Key { section: "scenario", names: &["speed", "v"], set: |c, v| Ok(c.scenario.speed = speed(v)?) },
    Key { section: "scenario", names: &["snapshots", "t"], set: |c, v| Ok(c.scenario.snapshots = num(v)?) },
    Key {
        section: "scenario",
        names: &["channel mode"],
        set: |c, v| {
            c.scenario.mode = match v.trim().to_ascii_lowercase().as_str() {
                "static" => ChannelMode::Static,
                "drifting" => ChannelMode::Drifting,
                _ => return Err(format!("unknown channel mode {v:?}")),
            };
            Ok(())
        },
    },
    Key { section: "scenario", names: &["scatterer radius"], set: |c, v| Ok(c.scenario.scatter_radius_m = pair(v, "m")?) },
    Key { section: "scenario", names: &["scatterer height"], set: |c, v| Ok(c.scenario.scatter_height_m = pair(v, "m")?) },
    Key { section: "scenario", names: &["ue distance"], set: |c, v| Ok(c.scenario.ue_distance_m = pair(v, "m")?) },
    Key { section: "dataset", names: &["trajectories", "reconstructions"], set: |c, v| Ok(c.n_traj = num(v)?) },
    Key { section: "dataset", names: &["split ratio"], set: |c, v| Ok(c.split_ratio = num(v)?) },
    Key { section: "dataset", names: &["seed"], set: |c, v| Ok(c.seed = num(v)?) },
    Key {
        section: "model",
        names: &["kind", "method"],
        set: |c, v| {
            c.kind = ModelKind::parse(v.trim()).ok_or_else(|| format!("unknown model kind {v:?}"))?;
            Ok(())
        },
    },
    Key { section: "model", names: &["input length", "k"], set: |c, v| Ok(c.model.k = num(v)?) },
    Key { section: "model", names: &["number of neurons of lstm", "n_z"], set: |c, v| Ok(c.model.n_z = num(v)?) },
    Key { section: "model", names: &["number of neurons of the weight-adjusted mlp", "n_w"], set: |c, v| Ok(c.model.n_w = num(v)?) },
    Key { section: "model", names: &["number of neurons of the bias-adjusted mlp", "n_s"], set: |c, v| Ok(c.model.n_s = num(v)?) },
    Key { section: "model", names: &["learning rate"], set: |c, v| Ok(c.model.lr = num(v)?) },
    Key { section: "model", names: &["batch size"], set: |c, v| Ok(c.model.batch_size = num(v)?) },
    Key { section: "model", names: &["epochs"], set: |c, v| Ok(c.model.epochs = num(v)?) },
    Key { section: "model", names: &["adjuster init scale"], set: |c, v| Ok(c.model.adjuster_init_scale = num(v)?) },
    Key { section: "model", names: &["augment"], set: |c, v| Ok(c.model.augment = boolean(v)?) },
    Key { section: "model", names: &["augment doppler"], set: |c, v| Ok(c.model.augment_doppler = num(v)?) },
    Key { section: "model", names: &["flags"], set: |c, v| apply_flags(&mut c.model, v) },
];

/// Keys that need the SRS period, applied after everything else.
const HORIZON_KEYS: &[(&str, &str)] = &[("dataset", "horizons"), ("model", "horizon")];

/// Applies `no-diff`, `no-adjuster`, `no-residual`, `diff`, `adjuster`,
/// `residual` in order. Dropping differencing also drops the residual unless
/// a later `residual` restores it.
pub fn apply_flags(cfg: &mut LpcnetConfig, flags: &str) -> Result<(), String> {
    for f in flags.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        match f {
            "no-diff" => {
                cfg.enable_diff = false;
                cfg.enable_residual = false;
            }
            "diff" => cfg.enable_diff = true,
            "no-adjuster" => cfg.enable_adjuster = false,
            "adjuster" => cfg.enable_adjuster = true,
            "no-residual" => cfg.enable_residual = false,
            "residual" => cfg.enable_residual = true,
            _ => return Err(format!("unknown flag {f:?}")),
        }
    }
    Ok(())
}

fn normalize(key: &str) -> String {
    key.split_whitespace().collect::<Vec<_>>().join(" ").to_ascii_lowercase()
}

impl ExperimentConfig {
    /// Desk-scale NLOS defaults: 8 trajectories of 700 snapshots, 60 km/h,
    /// LPCNet with `N_z = 64`, learning rate 1e-3, batch 50, 50 epochs.
    pub fn desk() -> Self {
        let mut model = LpcnetConfig::full_scale(32);
        model.n_z = 64;
        model.lr = 1e-3;
        model.batch_size = 50;
        model.epochs = 50;
        model.augment = true;
        Self {
            scenario: ScenarioConfig::nlos(),
            n_traj: 8,
            split_ratio: 0.815,
            horizons: vec![1, 2],
            kind: ModelKind::Lpcnet,
            model,
            seed: 1,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::desk();
        let mut section = String::new();
        let mut deferred: BTreeMap<&str, (usize, String)> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| CliError::Config(format!("line {}: {m}", no + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_ascii_lowercase();
                if !["scenario", "dataset", "model"].contains(&section.as_str()) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let key = normalize(k);
            if let Some(&(_, name)) = HORIZON_KEYS.iter().find(|(s, n)| *s == section && *n == key) {
                deferred.insert(name, (no + 1, v.trim().to_string()));
                continue;
            }
            // "Name, symbol" as printed in the tables matches on either part.
            let mut candidates = vec![key.clone()];
            candidates.extend(key.split(',').map(normalize));
            let entry = KEYS
                .iter()
                .find(|e| e.section == section && candidates.iter().any(|c| e.names.contains(&c.as_str())))
                .ok_or_else(|| err(format!("unknown key {:?} in [{section}]", k.trim())))?;
            (entry.set)(&mut cfg, v).map_err(err)?;
        }
        if let Some((no, v)) = deferred.get("horizons") {
            cfg.horizons = v
                .split(',')
                .map(|h| cfg.horizon_steps(h))
                .collect::<Result<_, _>>()
                .map_err(|m| CliError::Config(format!("line {no}: {m}")))?;
        }
        if let Some((no, v)) = deferred.get("horizon") {
            cfg.model.horizon = cfg.horizon_steps(v).map_err(|m| CliError::Config(format!("line {no}: {m}")))?;
        }
        cfg.model.n_b = cfg.scenario.n_b();
        cfg.validate()?;
        Ok(cfg)
    }

    /// A horizon in time units as a whole number of SRS periods.
    pub fn horizon_steps(&self, v: &str) -> Result<usize, String> {
        let t = quantity(v, "s")?;
        let steps = t / self.scenario.srs_period_s;
        let r = steps.round();
        if !(r >= 1.0) || (steps - r).abs() > 1e-9 * r.max(1.0) {
            return Err(format!("horizon {v:?} is not a positive multiple of the SRS period"));
        }
        Ok(r as usize)
    }

    pub fn horizon_ms(&self, steps: usize) -> f64 {
        steps as f64 * self.scenario.srs_period_s * 1e3
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.n_traj < 2 {
            return Err(CliError::Config("need at least two trajectories".into()));
        }
        if self.horizons.is_empty() {
            return Err(CliError::Config("no horizons configured".into()));
        }
        let need = self.model.k + self.horizons.iter().max().copied().unwrap_or(1);
        if self.scenario.snapshots < need {
            return Err(CliError::Config(format!(
                "{} snapshots per trajectory, need at least {need} for K and the longest horizon",
                self.scenario.snapshots
            )));
        }
        Ok(())
    }

    /// Resolved settings as ordered `(key, value)` pairs, for manifests.
    pub fn echo(&self) -> Vec<(String, String)> {
        let s = &self.scenario;
        let m = &self.model;
        let speed = match s.speed {
            SpeedSetting::FixedKmh(v) => format!("{v}"),
            SpeedSetting::RangeKmh { low, high } => format!("{low}-{high}"),
        };
        let track = match s.track {
            TrackKind::Linear => "linear".to_string(),
            TrackKind::Circular { radius_m } => format!("circular r={radius_m}"),
        };
        let horizons: Vec<String> = self.horizons.iter().map(|&h| format!("{}", self.horizon_ms(h))).collect();
        [
            ("Communication scenarios", s.kind.name().to_string()),
            ("L", s.n_paths.to_string()),
            ("Communication frequency (Hz)", format!("{}", s.carrier_hz)),
            ("N_l", s.n_l.to_string()),
            ("N_r", s.n_r.to_string()),
            ("N_b", s.n_b().to_string()),
            ("Polarization angles (deg)", format!("±{}", s.polarization_deg)),
            ("BS height (m)", format!("{}", s.bs_height_m)),
            ("UE height (m)", format!("{}", s.ue_height_m)),
            ("UE trajectory", track),
            ("Period of SRS (s)", format!("{}", s.srs_period_s)),
            ("K-factor (dB)", format!("{}", s.k_factor_db)),
            ("PDP decay (dB)", format!("{}", s.pdp_decay_db)),
            ("Shadowing (dB)", format!("{}", s.shadowing_db)),
            ("XPD (dB)", format!("{}", s.xpd_db)),
            ("Speed (km/h)", speed),
            ("Snapshots", s.snapshots.to_string()),
            ("Channel mode", format!("{:?}", s.mode).to_lowercase()),
            ("Trajectories", self.n_traj.to_string()),
            ("Split ratio", format!("{}", self.split_ratio)),
            ("Horizons (ms)", horizons.join(",")),
            ("Seed", self.seed.to_string()),
            ("Model", self.kind.name().to_string()),
            ("Input length K", m.k.to_string()),
            ("N_z", m.n_z.to_string()),
            ("N_w", m.n_w.to_string()),
            ("N_s", m.n_s.to_string()),
            ("Learning rate", format!("{}", m.lr)),
            ("Batch size", m.batch_size.to_string()),
            ("Epochs", m.epochs.to_string()),
            ("Training horizon (ms)", format!("{}", self.horizon_ms(m.horizon))),
            ("Preprocessor C", m.enable_diff.to_string()),
            ("Adjuster J", m.enable_adjuster.to_string()),
            ("Residual", m.enable_residual.to_string()),
            ("Augment", m.augment.to_string()),
            ("Augment Doppler", format!("{}", m.augment_doppler)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Model settings for `kind`: the baseline LSTM switches every module
    /// off and the beam predictor drops the residual.
    pub fn model_for(&self, kind: ModelKind) -> LpcnetConfig {
        match kind {
            ModelKind::Lstm => self.model.clone().lstm_baseline(),
            ModelKind::Jlpcnet => {
                let mut m = self.model.clone();
                m.enable_residual = false;
                m
            }
            _ => self.model.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_names_and_symbols() {
        let text = "
            [scenario]
            Communication scenarios = UMA-LOS
            Communication frequency, f = 3.5GHz
            Number of antennas in a column = 4
            N_r = 2
            Polarization angles = ±45°
            BS height = 25m
            UE trajectory = Linear track
            Period of SRS = 2ms
            speed = 30-60 km/h
            [dataset]
            horizons = 2ms, 4ms
            [model]
            Input length = 15
            Number of neurons of LSTM = 256
            Learning rate = 0.0001
            Batch size = 200
            Epochs = 1000
            horizon = 4ms
        ";
        let typo = text.replace("Communication frequency, f", "Carrier");
        let err = ExperimentConfig::parse(&typo).unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("line 4")), "{err}");
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.scenario.kind, ScenarioKind::LosLike);
        assert_eq!(c.scenario.n_paths, 12);
        assert_eq!(c.scenario.carrier_hz, 3.5e9);
        assert_eq!((c.scenario.n_l, c.scenario.n_r, c.model.n_b), (4, 2, 16));
        assert_eq!(c.scenario.polarization_deg, 45.0);
        assert_eq!(c.scenario.srs_period_s, 2e-3);
        assert_eq!(c.scenario.speed, SpeedSetting::RangeKmh { low: 30.0, high: 60.0 });
        assert_eq!(c.horizons, vec![1, 2]);
        assert_eq!(c.model.horizon, 2);
        assert_eq!((c.model.n_z, c.model.lr, c.model.batch_size, c.model.epochs), (256, 1e-4, 200, 1000));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "[nope]",
            "[model]\nN_q = 3",
            "[model]\nEpochs = many",
            "[dataset]\nhorizons = 3ms",
            "[dataset]\ntrajectories = 1",
            "[model]\nflags = no-lstm",
            "stray line",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn flags_reproduce_variants() {
        let mut m = LpcnetConfig::full_scale(32);
        apply_flags(&mut m, "no-diff,no-adjuster").unwrap();
        assert_eq!(m, LpcnetConfig::full_scale(32).lstm_baseline());
        let mut m = LpcnetConfig::full_scale(32);
        apply_flags(&mut m, "no-adjuster").unwrap();
        assert_eq!(m, LpcnetConfig::full_scale(32).ablation(true, false));
        let mut m = LpcnetConfig::full_scale(32);
        apply_flags(&mut m, "no-diff").unwrap();
        assert_eq!(m, LpcnetConfig::full_scale(32).ablation(false, true));
    }

    #[test]
    fn shipped_configs_parse() {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/");
        let full = ExperimentConfig::parse(&std::fs::read_to_string(format!("{root}full_nlos.ini")).unwrap()).unwrap();
        assert_eq!(full.n_traj, 60);
        assert_eq!(full.model.param_count(), 363_777);
        let desk = ExperimentConfig::parse(&std::fs::read_to_string(format!("{root}desk.ini")).unwrap()).unwrap();
        assert_eq!(desk, ExperimentConfig::desk());
    }
}
