//! Single-file binary checkpoint of an MPS.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic     8 bytes   b"BCHNMPS\0"
//! version   u32
//! sites     u64
//! center    u64
//! discarded f64
//! dims      sites × (left u64, phys u64, right u64)
//! data      per site, left·phys·right × (re f64, im f64), row-major
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{MpsState, SiteTensor};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"BCHNMPS\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(state: &MpsState, mut out: W) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&(state.len() as u64).to_le_bytes())?;
    out.write_all(&(state.center() as u64).to_le_bytes())?;
    out.write_all(&state.discarded_weight().to_le_bytes())?;
    for t in state.tensors() {
        let (l, p, r) = t.dims();
        for v in [l, p, r] {
            out.write_all(&(v as u64).to_le_bytes())?;
        }
    }
    for t in state.tensors() {
        for z in t.data() {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<MpsState> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let sites = read_u64(&mut input)? as usize;
    let center = read_u64(&mut input)? as usize;
    let discarded = f64::from_le_bytes(read_array(&mut input)?);
    if sites == 0 || center >= sites {
        return Err(Error::Checkpoint(format!("{sites} sites with center {center}")));
    }
    let mut dims = Vec::with_capacity(sites);
    for _ in 0..sites {
        let l = read_u64(&mut input)? as usize;
        let p = read_u64(&mut input)? as usize;
        let r = read_u64(&mut input)? as usize;
        dims.push((l, p, r));
    }
    let mut tensors = Vec::with_capacity(sites);
    for (l, p, r) in dims {
        let n = l
            .checked_mul(p)
            .and_then(|x| x.checked_mul(r))
            .ok_or_else(|| Error::Checkpoint("tensor size overflow".into()))?;
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let re = f64::from_le_bytes(read_array(&mut input)?);
            let im = f64::from_le_bytes(read_array(&mut input)?);
            data.push(Complex64::new(re, im));
        }
        tensors.push(SiteTensor::new(l, p, r, data)?);
    }
    for (i, pair) in tensors.windows(2).enumerate() {
        if pair[0].dims().2 != pair[1].dims().0 {
            return Err(Error::Checkpoint(format!("bond {i} dimensions disagree")));
        }
    }
    if tensors[0].dims().0 != 1 || tensors[sites - 1].dims().2 != 1 {
        return Err(Error::Checkpoint("outer bonds must have dimension 1".into()));
    }
    Ok(MpsState {
        tensors,
        center,
        discarded,
    })
}

fn read_array<R: Read, const N: usize>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(input)?))
}
