//! Canonical JSON: UTF-8, object keys sorted lexicographically, no
//! insignificant whitespace, floats in shortest round-trip form.
//!
//! Every hash in the platform is taken over this form, so two
//! implementations that agree on the types agree on the bytes.

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serializes `value` to its canonical JSON string.
///
/// Goes through [`serde_json::Value`], whose object map is ordered, so
/// struct field order never leaks into the output.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let value = serde_json::to_value(value)?;
    serde_json::to_string(&value)
}

/// Canonical JSON bytes.
pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    to_string(value).map(String::into_bytes)
}

pub fn from_str<T: DeserializeOwned>(text: &str) -> serde_json::Result<T> {
    serde_json::from_str(text)
}

pub fn from_slice<T: DeserializeOwned>(bytes: &[u8]) -> serde_json::Result<T> {
    serde_json::from_slice(bytes)
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// Lowercase hex SHA-256 of the canonical serialization of `value`.
pub fn hash_of<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    to_vec(value).map(sha256_hex)
}

/// True for a 64-character lowercase hex string.
pub fn is_sha256_hex(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}
