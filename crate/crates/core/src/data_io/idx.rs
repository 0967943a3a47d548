//! Reader for the IDX binary format used by the MNIST distribution.
//!
//! Layout: a big-endian `u32` magic (`0x00000803` for rank-3 unsigned-byte
//! image tensors, `0x00000801` for rank-1 label vectors), one big-endian `u32`
//! per dimension, then the raw bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

// IDX has no line structure; format errors report line 0 and describe the
// byte offset instead.
fn malformed(msg: impl Into<String>) -> Error {
    Error::format(0, msg)
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| malformed(format!("truncated header at byte {offset}")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(malformed(format!(
            "bad magic 0x{magic:08x}, expected 0x{expected:08x}"
        )));
    }
    Ok(())
}

/// Decodes an image file into a `(rows·cols) x count` matrix, one flattened
/// image per column in row-major pixel order. With `scale` the bytes are
/// divided by 255.
pub fn parse_idx_images(bytes: &[u8], scale: bool) -> Result<DenseMatrix> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let pixels = rows * cols;
    let payload = &bytes[16..];
    let expected = count * pixels;
    if payload.len() < expected {
        return Err(malformed(format!(
            "truncated payload: {} bytes for {count} images of {rows}x{cols}",
            payload.len()
        )));
    }
    let factor = if scale { 1.0 / 255.0 } else { 1.0 };
    let data = payload[..expected]
        .iter()
        .map(|&b| b as f64 * factor)
        .collect();
    DenseMatrix::new(pixels, count, data)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<i64>> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(malformed(format!(
            "truncated payload: {} bytes for {count} labels",
            payload.len()
        )));
    }
    Ok(payload[..count].iter().map(|&b| b as i64).collect())
}

/// Reads an image file with pixels scaled to `[0, 1]`.
pub fn read_idx_images(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_idx_images_with(path, true)
}

pub fn read_idx_images_with(path: impl AsRef<Path>, scale: bool) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_images(&bytes, scale)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_labels(&bytes)
}
