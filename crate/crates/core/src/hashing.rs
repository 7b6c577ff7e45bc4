//! Content hashes used to tie artifacts to the configuration that produced them.

use sha2::{Digest, Sha256};
use std::path::Path;

use crate::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Hash of a serializable value through its canonical JSON form.
///
/// `serde_json::Value` objects keep keys sorted, so round-tripping through
/// `Value` makes the encoding independent of struct field order.
pub fn config_hash<T: serde::Serialize>(value: &T) -> Result<String> {
    let canonical: serde_json::Value = serde_json::to_value(value)?;
    Ok(sha256_hex(serde_json::to_string(&canonical)?.as_bytes()))
}
