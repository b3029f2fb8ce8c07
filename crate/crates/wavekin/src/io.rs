//! Serialization helpers shared by the library and the CLI.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Version stamped into every JSON artifact as `schemaVersion`.
pub const SCHEMA_VERSION: u32 = 1;

/// Serialize `value` and insert `schemaVersion` at the top level of objects.
pub fn to_versioned_json<T: Serialize + ?Sized>(value: &T) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(value)?;
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("schemaVersion".into(), SCHEMA_VERSION.into());
    }
    Ok(v)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let v = to_versioned_json(value)?;
    std::fs::write(path, serde_json::to_string_pretty(&v)? + "\n")?;
    Ok(())
}
