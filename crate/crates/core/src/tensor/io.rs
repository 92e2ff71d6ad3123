//! `DT3 v1` binary tensor files.
//!
//! ```text
//! offset  size  content
//! 0       12    magic  b"DT3\0TENSOR\0\0"
//! 12      4     version, u32 little-endian (= 1)
//! 16      24    dims p1, p2, p3 as u64 little-endian
//! 40      8·N   N = p1·p2·p3 IEEE-754 f64 little-endian, storage order
//! ```
//!
//! Matrices are stored as `rows x cols x 1` tensors. An optional JSON
//! sidecar (`<file>.json`) carries `{dims, seed, description}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{checked_len, Tensor3};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAGIC: &[u8; 12] = b"DT3\0TENSOR\0\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

pub fn encode(t: &Tensor3) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for x in t.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, message: message.into() }
}

pub fn decode(bytes: &[u8]) -> Result<Tensor3> {
    if bytes.len() < MAGIC.len() {
        return Err(format_err(bytes.len(), "unexpected end of file in magic"));
    }
    if let Some(pos) = MAGIC.iter().zip(bytes).position(|(a, b)| a != b) {
        return Err(format_err(pos, "bad magic"));
    }
    let read_u32 = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| format_err(bytes.len(), "unexpected end of file in header"))
    };
    let read_u64 = |at: usize| -> Result<u64> {
        bytes
            .get(at..at + 8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| format_err(bytes.len(), "unexpected end of file in header"))
    };
    let version = read_u32(12)?;
    if version != VERSION {
        return Err(format_err(12, format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 3];
    for (k, d) in dims.iter_mut().enumerate() {
        let at = 16 + 8 * k;
        let raw = read_u64(at)?;
        *d = usize::try_from(raw).map_err(|_| format_err(at, "dimension does not fit in memory"))?;
        if *d == 0 {
            return Err(format_err(at, "zero dimension"));
        }
    }
    let n = checked_len(dims).map_err(|e| format_err(16, e.to_string()))?;
    let expected = HEADER_LEN + 8 * n;
    if bytes.len() < expected {
        return Err(format_err(bytes.len(), format!("unexpected end of file, expected {expected} bytes")));
    }
    if bytes.len() > expected {
        return Err(format_err(expected, "trailing bytes after tensor data"));
    }
    let mut data = Vec::with_capacity(n);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let x = f64::from_le_bytes(chunk.try_into().unwrap());
        if !x.is_finite() {
            return Err(format_err(HEADER_LEN + 8 * i, "non-finite value"));
        }
        data.push(x);
    }
    Ok(Tensor3::from_raw(dims, data))
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    fs::write(path, encode(t))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    decode(&fs::read(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let t = Tensor3::from_raw([m.rows(), m.cols(), 1], m.as_slice().to_vec());
    write_tensor(path, &t)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let t = read_tensor(path)?;
    let [r, c, p3] = t.dims();
    if p3 != 1 {
        return Err(format_err(32, format!("third dimension is {p3}, expected 1 for a matrix")));
    }
    Ok(Matrix::from_raw(r, c, t.into_vec()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub dims: [usize; 3],
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub description: String,
}

/// `<path>.json`.
pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar(path: impl AsRef<Path>, meta: &Metadata) -> Result<()> {
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

/// Reads the sidecar if present.
pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Option<Metadata>> {
    let p = sidecar_path(path);
    if !p.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(p)?)?))
}
