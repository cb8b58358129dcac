//! Model files: magic `CFMH`, u32 version, u32 header length, a UTF-8
//! `key=value` header naming the model kind and echoing its configuration,
//! then the parameter checkpoint.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{LpcnetConfig, ModelKind, PredictorError};
use crate::nn::{read_checkpoint, write_checkpoint, ParamStore, Real};

pub const MODEL_MAGIC: &[u8; 4] = b"CFMH";
pub const MODEL_VERSION: u32 = 1;

/// Floating-point type a model was trained in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn of<T: Real>() -> Self {
        if std::mem::size_of::<T>() == 4 {
            Precision::F32
        } else {
            Precision::F64
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "f32" => Some(Precision::F32),
            "f64" => Some(Precision::F64),
            _ => None,
        }
    }
}

/// Contents of a model file. Parameters are held in `f64`; an `f32` model
/// converts back exactly.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub kind: ModelKind,
    pub config: LpcnetConfig,
    pub precision: Precision,
    pub store: ParamStore<f64>,
}

fn header_text(kind: ModelKind, cfg: &LpcnetConfig, precision: Precision) -> String {
    let fields: [(&str, String); 17] = [
        ("kind", kind.name().to_string()),
        ("dtype", precision.name().to_string()),
        ("N_b", cfg.n_b.to_string()),
        ("K", cfg.k.to_string()),
        ("N_z", cfg.n_z.to_string()),
        ("N_w", cfg.n_w.to_string()),
        ("N_s", cfg.n_s.to_string()),
        ("horizon", cfg.horizon.to_string()),
        ("enable_diff", cfg.enable_diff.to_string()),
        ("enable_adjuster", cfg.enable_adjuster.to_string()),
        ("enable_residual", cfg.enable_residual.to_string()),
        ("learning_rate", format!("{:e}", cfg.lr)),
        ("batch_size", cfg.batch_size.to_string()),
        ("epochs", cfg.epochs.to_string()),
        ("adjuster_init_scale", format!("{:e}", cfg.adjuster_init_scale)),
        ("augment", cfg.augment.to_string()),
        ("augment_doppler", format!("{:e}", cfg.augment_doppler)),
    ];
    fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn parse_header(text: &str) -> Result<(ModelKind, LpcnetConfig, Precision), PredictorError> {
    let map: BTreeMap<&str, &str> = text.lines().filter_map(|l| l.split_once('=')).collect();
    let get = |k: &str| map.get(k).copied().ok_or_else(|| PredictorError::Format(format!("missing header key {k}")));
    fn num<V: std::str::FromStr>(key: &str, s: &str) -> Result<V, PredictorError> {
        s.parse().map_err(|_| PredictorError::Format(format!("bad value {s:?} for {key}")))
    }
    let kind = ModelKind::parse(get("kind")?).ok_or_else(|| PredictorError::Format("unknown model kind".into()))?;
    let precision = Precision::parse(get("dtype")?).ok_or_else(|| PredictorError::Format("unknown dtype".into()))?;
    let cfg = LpcnetConfig {
        n_b: num("N_b", get("N_b")?)?,
        k: num("K", get("K")?)?,
        n_z: num("N_z", get("N_z")?)?,
        n_w: num("N_w", get("N_w")?)?,
        n_s: num("N_s", get("N_s")?)?,
        horizon: num("horizon", get("horizon")?)?,
        enable_diff: num("enable_diff", get("enable_diff")?)?,
        enable_adjuster: num("enable_adjuster", get("enable_adjuster")?)?,
        enable_residual: num("enable_residual", get("enable_residual")?)?,
        lr: num("learning_rate", get("learning_rate")?)?,
        batch_size: num("batch_size", get("batch_size")?)?,
        epochs: num("epochs", get("epochs")?)?,
        adjuster_init_scale: num("adjuster_init_scale", get("adjuster_init_scale")?)?,
        augment: num("augment", get("augment")?)?,
        augment_doppler: num("augment_doppler", get("augment_doppler")?)?,
    };
    Ok((kind, cfg, precision))
}

pub fn write_model<T: Real, W: Write>(
    mut w: W,
    kind: ModelKind,
    cfg: &LpcnetConfig,
    store: &ParamStore<T>,
) -> Result<(), PredictorError> {
    let header = header_text(kind, cfg, Precision::of::<T>());
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(header.as_bytes())?;
    write_checkpoint(store, w)?;
    Ok(())
}

pub fn read_model<R: Read>(mut r: R) -> Result<ModelFile, PredictorError> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[..4] != MODEL_MAGIC {
        return Err(PredictorError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(PredictorError::Format(format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    if len > 1 << 20 {
        return Err(PredictorError::Format("header too long".into()));
    }
    let mut text = vec![0u8; len];
    r.read_exact(&mut text)?;
    let text = String::from_utf8(text).map_err(|_| PredictorError::Format("header is not UTF-8".into()))?;
    let (kind, config, precision) = parse_header(&text)?;
    let store = read_checkpoint(r)?;
    Ok(ModelFile {
        kind,
        config,
        precision,
        store,
    })
}
