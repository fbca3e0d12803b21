//! Minimal NIfTI-1 reader: little-endian, single 3D frame, float32 or
//! int16, plain or gzipped, data in the same file (`n+1` magic).
//!
//! Orientation and affine metadata are deliberately ignored; volumes load in
//! stored voxel order with pixdim spacing. Float32 data are rescaled by
//! scl_slope/scl_inter when slope is nonzero. Int16 data are rescaled the
//! same way and then min-max normalized to [0, 1], which is what the rest of
//! the toolkit expects of an intensity volume.

use crate::error::{Error, Result};
use crate::volume::Volume;
use byteorder::{ByteOrder, LittleEndian};
use flate2::read::GzDecoder;
use std::io::Read;
use std::path::Path;

const HEADER_LEN: usize = 348;

/// Loads a NIfTI-1 volume (`.nii` or `.nii.gz`).
pub fn read_nifti(path: &Path) -> Result<Volume> {
    let raw = std::fs::read(path)?;
    let bytes = if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        out
    } else {
        raw
    };
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedHeader(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let sizeof_hdr = LittleEndian::read_i32(&bytes[0..4]);
    if sizeof_hdr != HEADER_LEN as i32 {
        return Err(Error::MalformedHeader(format!(
            "sizeof_hdr = {sizeof_hdr}, expected {HEADER_LEN} (big-endian files are not supported)"
        )));
    }
    let magic = &bytes[344..348];
    if magic != b"n+1\0" {
        if magic == b"ni1\0" {
            return Err(Error::MalformedHeader(
                "detached .hdr/.img pairs are not supported".to_string(),
            ));
        }
        return Err(Error::MalformedHeader(format!("bad magic {magic:?}")));
    }
    let mut dim = [0i16; 8];
    for (a, d) in dim.iter_mut().enumerate() {
        *d = LittleEndian::read_i16(&bytes[40 + 2 * a..42 + 2 * a]);
    }
    let three_dimensional = dim[0] == 3 || (dim[0] == 4 && dim[4] <= 1);
    if !three_dimensional {
        return Err(Error::NotThreeDimensional(format!(
            "dim[0] = {}, dim[4] = {}",
            dim[0], dim[4]
        )));
    }
    if dim[1] < 1 || dim[2] < 1 || dim[3] < 1 {
        return Err(Error::MalformedHeader(format!(
            "non-positive extent in dim {:?}",
            &dim[1..4]
        )));
    }
    let dims = [dim[1] as usize, dim[2] as usize, dim[3] as usize];
    let datatype = LittleEndian::read_i16(&bytes[70..72]);
    let mut spacing = [1.0f64; 3];
    for (a, s) in spacing.iter_mut().enumerate() {
        let p = LittleEndian::read_f32(&bytes[76 + 4 * (a + 1)..80 + 4 * (a + 1)]);
        if p.is_finite() && p > 0.0 {
            *s = f64::from(p);
        }
    }
    let vox_offset = LittleEndian::read_f32(&bytes[108..112]);
    if !vox_offset.is_finite() || vox_offset < HEADER_LEN as f32 {
        return Err(Error::MalformedHeader(format!("vox_offset = {vox_offset}")));
    }
    let offset = vox_offset.round() as usize;
    let slope = f64::from(LittleEndian::read_f32(&bytes[112..116]));
    let inter = f64::from(LittleEndian::read_f32(&bytes[116..120]));
    let rescale = |v: f64| if slope != 0.0 { v * slope + inter } else { v };

    let n = dims[0] * dims[1] * dims[2];
    let data = match datatype {
        // NIfTI code 16: float32
        16 => {
            let need = 4 * n;
            let payload = bytes
                .get(offset..offset + need)
                .ok_or_else(|| Error::MalformedHeader(format!(
                    "payload needs {need} bytes at offset {offset}, file holds {}",
                    bytes.len()
                )))?;
            payload
                .chunks_exact(4)
                .map(|c| rescale(f64::from(LittleEndian::read_f32(c))))
                .collect::<Vec<f64>>()
        }
        // NIfTI code 4: int16, min-max normalized after rescale
        4 => {
            let need = 2 * n;
            let payload = bytes
                .get(offset..offset + need)
                .ok_or_else(|| Error::MalformedHeader(format!(
                    "payload needs {need} bytes at offset {offset}, file holds {}",
                    bytes.len()
                )))?;
            let values: Vec<f64> = payload
                .chunks_exact(2)
                .map(|c| rescale(f64::from(LittleEndian::read_i16(c))))
                .collect();
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                values.iter().map(|v| (v - lo) / (hi - lo)).collect()
            } else {
                vec![0.0; n]
            }
        }
        other => return Err(Error::UnsupportedDatatype(other)),
    };
    Volume::new(dims, spacing, data)
}
