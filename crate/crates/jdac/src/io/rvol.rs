//! The rvol container: `RVOL` magic, version, dims, spacing, residual flag,
//! then the voxels as little-endian float32 in x-fastest order.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "RVOL"
//!      4     4  version (u32, currently 1)
//!      8    12  dims (3 x u32)
//!     20    12  spacing (3 x f32, mm)
//!     32     1  residual flag (0 or 1)
//!     33     3  padding
//!     36   4*N  payload (f32, x fastest)
//! ```
//!
//! Round trips are bit-lossless for every volume whose samples are exactly
//! representable in f32 (which includes everything this crate writes, since
//! writing casts through f32).

use crate::error::{Error, Result};
use crate::volume::Volume;
use byteorder::{ByteOrder, LittleEndian};
use std::path::Path;

pub const RVOL_MAGIC: [u8; 4] = *b"RVOL";
pub const RVOL_VERSION: u32 = 1;
const HEADER_LEN: usize = 36;

/// Serializes a volume. Values are narrowed to f32.
pub fn write_rvol(v: &Volume, path: &Path) -> Result<()> {
    let dims = v.dims();
    let n = v.len();
    let mut bytes = vec![0u8; HEADER_LEN + 4 * n];
    bytes[0..4].copy_from_slice(&RVOL_MAGIC);
    LittleEndian::write_u32(&mut bytes[4..8], RVOL_VERSION);
    for a in 0..3 {
        LittleEndian::write_u32(&mut bytes[8 + 4 * a..12 + 4 * a], dims[a] as u32);
        LittleEndian::write_f32(
            &mut bytes[20 + 4 * a..24 + 4 * a],
            v.spacing()[a] as f32,
        );
    }
    bytes[32] = v.residual() as u8;
    for (chunk, &value) in bytes[HEADER_LEN..].chunks_exact_mut(4).zip(v.data()) {
        LittleEndian::write_f32(chunk, value as f32);
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Deserializes a volume, validating the header strictly.
pub fn read_rvol(path: &Path) -> Result<Volume> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 {
        return Err(Error::TruncatedPayload(format!(
            "{} bytes, too short for the magic",
            bytes.len()
        )));
    }
    if bytes[0..4] != RVOL_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let version = LittleEndian::read_u32(&bytes[4..8]);
    if version != RVOL_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let mut dims = [0usize; 3];
    let mut spacing = [0.0f64; 3];
    for a in 0..3 {
        dims[a] = LittleEndian::read_u32(&bytes[8 + 4 * a..12 + 4 * a]) as usize;
        spacing[a] = f64::from(LittleEndian::read_f32(&bytes[20 + 4 * a..24 + 4 * a]));
    }
    let residual = bytes[32] != 0;
    let n = dims[0]
        .checked_mul(dims[1])
        .and_then(|p| p.checked_mul(dims[2]))
        .ok_or_else(|| Error::TruncatedPayload(format!("dims {dims:?} overflow")))?;
    let expected = HEADER_LEN + 4 * n;
    if bytes.len() < expected {
        return Err(Error::TruncatedPayload(format!(
            "payload holds {} bytes, dims {:?} need {}",
            bytes.len() - HEADER_LEN,
            dims,
            4 * n
        )));
    }
    if bytes.len() > expected {
        return Err(Error::OversizedPayload(format!(
            "payload holds {} bytes, dims {:?} need {}",
            bytes.len() - HEADER_LEN,
            dims,
            4 * n
        )));
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(LittleEndian::read_f32(c)))
        .collect();
    let mut v = Volume::new(dims, spacing, data)?;
    v.set_residual(residual);
    Ok(v)
}
