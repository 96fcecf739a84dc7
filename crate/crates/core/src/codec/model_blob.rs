//! Bootstrap parameters as an entropy-coded blob.

use crate::coder::{decode_bytes, encode_bytes};
use crate::error::{Error, Result};
use crate::models::{Bootstrap, BootstrapConfig};

/// Little-endian `f32` values in store order, coded with an adaptive
/// order-0 byte model.
pub fn serialize_model(values: &[f32]) -> Vec<u8> {
    let raw: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    encode_bytes(&raw).0
}

pub fn deserialize_values(blob: &[u8], count: usize) -> Result<Vec<f32>> {
    let raw = decode_bytes(blob, blob.len() as u64 * 8, count * 4);
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::CorruptArchive("non-finite model parameter".into()));
    }
    Ok(values)
}

pub fn deserialize_model(blob: &[u8], cfg: BootstrapConfig) -> Result<Bootstrap> {
    let values = deserialize_values(blob, cfg.param_count())?;
    Bootstrap::from_values(cfg, &values)
}
