//! NNCG1 weight files.
//!
//! Layout: the 5 magic bytes `NNCG1`, a little-endian `u32` header length, a
//! UTF-8 JSON header, the payload of little-endian `f32` values (row-major, each
//! tensor at its declared byte offset from the payload start), and a trailing
//! little-endian CRC32 of the payload.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::ModelWeights;
use super::{count_parameters, ConfigError, ModelConfig};

pub const MAGIC: &[u8; 5] = b"NNCG1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic: not an NNCG1 file")]
    BadMagic,
    #[error("bad header: {0}")]
    Header(String),
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("missing tensor {0}")]
    MissingTensor(String),
    #[error("checksum failure: {0}")]
    Checksum(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderConfig {
    pub d: usize,
    pub h: usize,
    pub n_enc: usize,
    pub n_dec: usize,
    pub input_dim: usize,
    pub ln_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset from the start of the payload.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsHeader {
    pub format_version: u32,
    pub config: HeaderConfig,
    pub divisors: [f64; 3],
    pub total_params: usize,
    pub tensors: Vec<TensorEntry>,
}

impl WeightsHeader {
    pub fn model_config(&self) -> ModelConfig {
        let c = &self.config;
        ModelConfig {
            d: c.d,
            h: c.h,
            n_enc: c.n_enc,
            n_dec: c.n_dec,
            input_dim: c.input_dim,
            ln_epsilon: c.ln_epsilon,
            feature_divisors: self.divisors,
        }
    }
}

/// Serializes weights to NNCG1 bytes.
pub fn write_weights(w: &ModelWeights) -> Vec<u8> {
    let c = &w.config;
    let mut tensors = Vec::new();
    let mut payload: Vec<u8> = Vec::with_capacity(4 * w.param_count());
    w.for_each_param(&mut |name, shape, data| {
        tensors.push(TensorEntry {
            name,
            shape,
            offset: payload.len(),
        });
        for v in data {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    });
    let header = WeightsHeader {
        format_version: FORMAT_VERSION,
        config: HeaderConfig {
            d: c.d,
            h: c.h,
            n_enc: c.n_enc,
            n_dec: c.n_dec,
            input_dim: c.input_dim,
            ln_epsilon: c.ln_epsilon,
        },
        divisors: c.feature_divisors,
        total_params: w.param_count(),
        tensors,
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(MAGIC.len() + 4 + header.len() + payload.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

/// Parses and validates only the header, for inspection.
pub fn read_header(bytes: &[u8]) -> Result<(WeightsHeader, usize), WeightsError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(WeightsError::BadMagic);
    }
    let len_end = MAGIC.len() + 4;
    let len_bytes: [u8; 4] = bytes
        .get(MAGIC.len()..len_end)
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| WeightsError::Header("file ends before the header length".into()))?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    let header_bytes = bytes
        .get(len_end..len_end + header_len)
        .ok_or_else(|| WeightsError::Header("file ends inside the header".into()))?;
    let header: WeightsHeader =
        serde_json::from_slice(header_bytes).map_err(|e| WeightsError::Header(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(WeightsError::Header(format!("unsupported format_version {}", header.format_version)));
    }
    Ok((header, len_end + header_len))
}

/// Parses NNCG1 bytes, checking the CRC, the declared parameter total and every
/// tensor shape against the config.
pub fn read_weights(bytes: &[u8]) -> Result<ModelWeights, WeightsError> {
    let (header, payload_start) = read_header(bytes)?;
    let config = header.model_config();
    config.validate()?;

    let summed: usize = header.tensors.iter().map(|t| t.shape.iter().product::<usize>()).sum();
    if summed != header.total_params {
        return Err(WeightsError::ShapeMismatch(format!(
            "header declares {} parameters but tensors hold {summed}",
            header.total_params
        )));
    }
    let expected = count_parameters(&config);
    if header.total_params != expected {
        return Err(WeightsError::ShapeMismatch(format!(
            "config implies {expected} parameters, header declares {}",
            header.total_params
        )));
    }

    let payload_len = 4 * header.total_params;
    if bytes.len() < payload_start + payload_len + 4 {
        return Err(WeightsError::Checksum(format!(
            "truncated file: expected {} payload bytes plus CRC, found {}",
            payload_len,
            bytes.len().saturating_sub(payload_start)
        )));
    }
    if bytes.len() > payload_start + payload_len + 4 {
        return Err(WeightsError::Checksum("trailing bytes after CRC".into()));
    }
    let payload = &bytes[payload_start..payload_start + payload_len];
    let stored = u32::from_le_bytes(bytes[payload_start + payload_len..].try_into().expect("4 bytes"));
    let actual = crc32fast::hash(payload);
    if stored != actual {
        return Err(WeightsError::Checksum(format!("stored {stored:08x}, computed {actual:08x}")));
    }

    let entries: HashMap<&str, &TensorEntry> = header.tensors.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut weights = ModelWeights::zeros(&config)?;
    let mut err = None;
    weights.for_each_param_mut(&mut |name, shape, data| {
        if err.is_some() {
            return;
        }
        let Some(entry) = entries.get(name.as_str()) else {
            err = Some(WeightsError::MissingTensor(name));
            return;
        };
        if entry.shape != shape {
            err = Some(WeightsError::ShapeMismatch(format!(
                "{name}: file shape {:?}, expected {shape:?}",
                entry.shape
            )));
            return;
        }
        let end = entry.offset + 4 * data.len();
        if entry.offset % 4 != 0 || end > payload.len() {
            err = Some(WeightsError::ShapeMismatch(format!("{name}: offset {} out of range", entry.offset)));
            return;
        }
        for (v, chunk) in data.iter_mut().zip(payload[entry.offset..end].chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(weights),
    }
}

pub fn save_weights(w: &ModelWeights, path: impl AsRef<Path>) -> Result<(), WeightsError> {
    let path = path.as_ref();
    fs::write(path, write_weights(w)).map_err(|source| WeightsError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<ModelWeights, WeightsError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| WeightsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_weights(&bytes)
}
