//! `WHM1` dense matrix files.
//!
//! Layout: the 4 ASCII bytes `WHM1`, row count and column count as
//! little-endian `u64`, then `rows * cols` little-endian IEEE-754 `f64`
//! values in row-major order.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"WHM1";

pub fn encode<T: Real>(m: &DMatrix<T>) -> Vec<u8> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(20 + 8 * rows * cols);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for i in 0..rows {
        for j in 0..cols {
            out.extend_from_slice(&m[(i, j)].as_f64().to_le_bytes());
        }
    }
    out
}

pub fn decode<T: Real>(bytes: &[u8]) -> Result<DMatrix<T>> {
    if bytes.len() < 20 {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("missing WHM1 magic".into()));
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(20))
        .ok_or_else(|| Error::Format(format!("shape {rows}x{cols} overflows")))?;
    if bytes.len() as u64 != expected {
        return Err(Error::Format(format!(
            "shape {rows}x{cols} needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let vals = bytes[20..]
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())));
    Ok(DMatrix::from_row_iterator(rows, cols, vals))
}

pub fn save<T: Real>(path: impl AsRef<Path>, m: &DMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(m)).map_err(|e| Error::io(path, e))
}

pub fn load<T: Real>(path: impl AsRef<Path>) -> Result<DMatrix<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Column vector helper for per-vertex data.
pub fn column<T: Real>(values: &[T]) -> DMatrix<T> {
    DMatrix::from_column_slice(values.len(), 1, values)
}
