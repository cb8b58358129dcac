//! Binary parameter checkpoint:
//!
//! ```text
//! "CFNN" | u32 version | u32 entry count
//! per entry: u32 name length | UTF-8 name | u8 rank | rank × u32 dims | f64 payload
//! ```
//!
//! All integers and floats are little-endian.

use std::io::{Read, Write};

use super::{NnError, ParamStore, Real};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"CFNN";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<T: Real, W: Write>(store: &ParamStore<T>, mut w: W) -> Result<(), NnError> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(store.specs().len() as u32).to_le_bytes())?;
    for spec in store.specs() {
        let name = spec.name.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
        let rank = u8::try_from(spec.shape.len()).map_err(|_| NnError::Checkpoint(format!("rank of {} exceeds 255", spec.name)))?;
        w.write_all(&[rank])?;
        for &d in &spec.shape {
            let d = u32::try_from(d).map_err(|_| NnError::Checkpoint(format!("dimension {d} exceeds u32")))?;
            w.write_all(&d.to_le_bytes())?;
        }
        let id = store.id(&spec.name)?;
        for v in store.value(id) {
            w.write_all(&v.to_f64_lossless().to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_checkpoint<T: Real, R: Read>(mut r: R) -> Result<ParamStore<T>, NnError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(NnError::Checkpoint(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut r)?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        let mut rank = [0u8; 1];
        r.read_exact(&mut rank)?;
        let shape = (0..rank[0]).map(|_| read_u32(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let id = store.add(&name, &shape)?;
        for v in store.value_mut(id) {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *v = T::of(f64::from_le_bytes(b));
        }
    }
    Ok(store)
}
