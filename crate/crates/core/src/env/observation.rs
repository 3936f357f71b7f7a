//! Keyed tensor bundles handed to learners.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32 = 0,
    U8 = 1,
}

impl DType {
    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::U8 => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<DType> {
        match code {
            0 => Ok(DType::F32),
            1 => Ok(DType::U8),
            other => Err(Error::Protocol(format!("unknown element type {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

/// Row-major tensor; `shape` always multiplies out to the element count.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub shape: Vec<u32>,
    pub data: TensorData,
}

impl Tensor {
    pub fn f32(shape: Vec<u32>, data: Vec<f32>) -> Tensor {
        assert_eq!(
            shape.iter().map(|&d| d as usize).product::<usize>(),
            data.len(),
            "shape {shape:?} does not match {} elements",
            data.len()
        );
        Tensor {
            shape,
            data: TensorData::F32(data),
        }
    }

    pub fn u8(shape: Vec<u32>, data: Vec<u8>) -> Tensor {
        assert_eq!(shape.iter().map(|&d| d as usize).product::<usize>(), data.len());
        Tensor {
            shape,
            data: TensorData::U8(data),
        }
    }

    pub fn dtype(&self) -> DType {
        match self.data {
            TensorData::F32(_) => DType::F32,
            TensorData::U8(_) => DType::U8,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            TensorData::F32(v) => v.len(),
            TensorData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            TensorData::F32(v) => Some(v),
            TensorData::U8(_) => None,
        }
    }

    /// Little-endian payload bytes.
    pub fn payload(&self) -> Vec<u8> {
        match &self.data {
            TensorData::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            TensorData::U8(v) => v.clone(),
        }
    }

    pub fn from_payload(dtype: DType, shape: Vec<u32>, bytes: &[u8]) -> Result<Tensor> {
        let count = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .ok_or_else(|| Error::Protocol("tensor shape overflows".into()))?;
        if count.checked_mul(dtype.size()) != Some(bytes.len()) {
            return Err(Error::Protocol(format!(
                "tensor {shape:?} needs {} bytes, got {}",
                count.saturating_mul(dtype.size()),
                bytes.len()
            )));
        }
        let data = match dtype {
            DType::F32 => TensorData::F32(
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            ),
            DType::U8 => TensorData::U8(bytes.to_vec()),
        };
        Ok(Tensor { shape, data })
    }
}

/// Sensor readings of one agent for one step, in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservationFrame(pub IndexMap<String, Tensor>);

impl ObservationFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, tensor: Tensor) {
        self.0.insert(key.into(), tensor);
    }

    pub fn get(&self, key: &str) -> Option<&Tensor> {
        self.0.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Key, element type and shape of every entry.
    pub fn spec(&self) -> Vec<(String, DType, Vec<u32>)> {
        self.0
            .iter()
            .map(|(k, t)| (k.clone(), t.dtype(), t.shape.clone()))
            .collect()
    }
}
