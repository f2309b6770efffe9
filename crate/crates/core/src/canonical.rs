//! Canonical JSON rendering (sorted keys, compact) and content hashing.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serialize `value` to compact JSON with object keys sorted lexicographically.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    // serde_json::Map is a BTreeMap unless `preserve_order` is enabled, so
    // round-tripping through Value sorts every object's keys.
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_string(&v).expect("JSON value renders")
}

/// Hex SHA-256 of the canonical JSON form.
pub fn canonical_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let digest = Sha256::digest(to_canonical_json(value).as_bytes());
    hex::encode(digest)
}

/// Serialize a `BTreeMap<K, V>` as a sequence of `[key, value]` pairs so that
/// non-string keys survive JSON.
pub(crate) mod pairs {
    use serde::de::DeserializeOwned;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<K, V, S>(map: &BTreeMap<K, V>, ser: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        V: Serialize,
        S: Serializer,
    {
        ser.collect_seq(map.iter())
    }

    pub fn deserialize<'de, K, V, D>(de: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: DeserializeOwned + Ord,
        V: DeserializeOwned,
        D: Deserializer<'de>,
    {
        let entries: Vec<(K, V)> = Vec::deserialize(de)?;
        Ok(entries.into_iter().collect())
    }
}
