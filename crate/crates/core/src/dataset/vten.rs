//! Single-tensor file format: `"VTEN" | u8 dtype | u8 ndim | ndim x u32 dims
//! | row-major little-endian payload`.

use std::path::Path;

use crate::env::{DType, Tensor};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"VTEN";

pub fn encode(t: &Tensor) -> Vec<u8> {
    let payload = t.payload();
    let mut out = Vec::with_capacity(6 + 4 * t.shape.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.push(t.dtype() as u8);
    out.push(t.shape.len() as u8);
    for d in &t.shape {
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.extend_from_slice(&payload);
    out
}

pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    let bad = |m: &str| Error::Protocol(format!("bad tensor file: {m}"));
    if bytes.len() < 6 || &bytes[..4] != MAGIC {
        return Err(bad("missing VTEN magic"));
    }
    let dtype = DType::from_code(bytes[4])?;
    let ndim = bytes[5] as usize;
    let header = 6 + 4 * ndim;
    if bytes.len() < header {
        return Err(bad("truncated header"));
    }
    let shape: Vec<u32> = bytes[6..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Tensor::from_payload(dtype, shape, &bytes[header..])
}

pub fn write(path: &Path, t: &Tensor) -> Result<usize> {
    let bytes = encode(t);
    std::fs::write(path, &bytes)?;
    Ok(bytes.len())
}

pub fn read(path: &Path) -> Result<Tensor> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let t = Tensor::u8(vec![2, 1], vec![7, 9]);
        assert_eq!(encode(&t), b"VTEN\x01\x02\x02\0\0\0\x01\0\0\0\x07\x09");
        assert_eq!(decode(&encode(&t)).unwrap(), t);
    }

    #[test]
    fn payload_must_match_header() {
        let mut b = encode(&Tensor::f32(vec![3], vec![1.0, 2.0, 3.0]));
        b.pop();
        assert!(decode(&b).is_err());
        assert!(decode(b"VTEX\0\0").is_err());
    }
}
