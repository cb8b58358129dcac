//! Binary dataset container.
//!
//! Layout, all little-endian: magic `CHPD`, u32 version, u32 `N_b`, u32 `T`,
//! u32 trajectory count, u8 dtype, then per trajectory three u64 (speed in
//! mm/s, scenario id, seed index), then samples ordered
//! `[trajectory][time][antenna]` as `(re, im)` pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{ChannelError, ScenarioKind, TrajectoryRecord};
use crate::numerics::CVec;

pub const DATASET_MAGIC: &[u8; 4] = b"CHPD";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetDtype {
    F64 = 1,
    F32 = 2,
}

impl DatasetDtype {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(DatasetDtype::F64),
            2 => Some(DatasetDtype::F32),
            _ => None,
        }
    }
}

fn u32_of(n: usize, what: &str) -> Result<u32, ChannelError> {
    u32::try_from(n).map_err(|_| ChannelError::Format(format!("{what} {n} exceeds u32")))
}

pub fn write_dataset<W: Write>(mut w: W, records: &[TrajectoryRecord], dtype: DatasetDtype) -> Result<(), ChannelError> {
    let first = records
        .first()
        .ok_or_else(|| ChannelError::Format("no trajectories to write".into()))?;
    let t = first.snapshots.len();
    let n_b = first.snapshots.first().map_or(0, |s| s.len());
    for r in records {
        if r.snapshots.len() != t || r.snapshots.iter().any(|s| s.len() != n_b) {
            return Err(ChannelError::Format("trajectories must share T and N_b".into()));
        }
    }
    w.write_all(DATASET_MAGIC)?;
    w.write_all(&DATASET_VERSION.to_le_bytes())?;
    w.write_all(&u32_of(n_b, "N_b")?.to_le_bytes())?;
    w.write_all(&u32_of(t, "T")?.to_le_bytes())?;
    w.write_all(&u32_of(records.len(), "trajectory count")?.to_le_bytes())?;
    w.write_all(&[dtype as u8])?;
    for r in records {
        let mm = (r.speed_mps * 1000.0).round() as u64;
        w.write_all(&mm.to_le_bytes())?;
        w.write_all(&r.scenario.id().to_le_bytes())?;
        w.write_all(&r.seed_index.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(n_b * 16);
    for r in records {
        for s in &r.snapshots {
            buf.clear();
            for z in s.iter() {
                match dtype {
                    DatasetDtype::F64 => {
                        buf.extend_from_slice(&z.re.to_le_bytes());
                        buf.extend_from_slice(&z.im.to_le_bytes());
                    }
                    DatasetDtype::F32 => {
                        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
                        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
                    }
                }
            }
            w.write_all(&buf)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], ChannelError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => ChannelError::Format("truncated file".into()),
        _ => ChannelError::Io(e),
    })?;
    Ok(b)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, ChannelError> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, ChannelError> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

pub fn read_dataset<R: Read>(mut r: R) -> Result<Vec<TrajectoryRecord>, ChannelError> {
    if &read_array::<4, _>(&mut r)? != DATASET_MAGIC {
        return Err(ChannelError::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != DATASET_VERSION {
        return Err(ChannelError::Format(format!("unsupported version {version}")));
    }
    let n_b = read_u32(&mut r)? as usize;
    let t = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let dtype = DatasetDtype::from_byte(read_array::<1, _>(&mut r)?[0])
        .ok_or_else(|| ChannelError::Format("unknown dtype".into()))?;
    let mut records = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let mm = read_u64(&mut r)?;
        let id = read_u64(&mut r)?;
        let seed_index = read_u64(&mut r)?;
        let scenario = ScenarioKind::from_id(id).ok_or_else(|| ChannelError::Format(format!("unknown scenario id {id}")))?;
        records.push(TrajectoryRecord {
            scenario,
            speed_mps: mm as f64 / 1000.0,
            seed_index,
            snapshots: Vec::with_capacity(t),
        });
    }
    for rec in &mut records {
        for _ in 0..t {
            let mut s = Vec::with_capacity(n_b);
            for _ in 0..n_b {
                let z = match dtype {
                    DatasetDtype::F64 => {
                        Complex64::new(f64::from_le_bytes(read_array(&mut r)?), f64::from_le_bytes(read_array(&mut r)?))
                    }
                    DatasetDtype::F32 => Complex64::new(
                        f32::from_le_bytes(read_array(&mut r)?) as f64,
                        f32::from_le_bytes(read_array(&mut r)?) as f64,
                    ),
                };
                s.push(z);
            }
            rec.snapshots.push(CVec::new(s));
        }
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(ChannelError::Format("trailing bytes".into()));
    }
    Ok(records)
}
