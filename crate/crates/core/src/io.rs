//! Result files: JSON envelopes with a schema version, CSV tables, and hashes.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learning::LearningCurve;
use crate::strategic::{AuditRow, StrategicInstance};

pub const SCHEMA_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Package name and version plus a short hash of both.
pub fn tool_version() -> String {
    let id = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
    format!("{id} ({})", &sha256_hex(id.as_bytes())[..12])
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

/// Fail early when an output file cannot be created.
pub fn check_output_path(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !parent.is_dir() {
        return Err(io_err(path, "output directory does not exist"));
    }
    if path.is_dir() {
        return Err(io_err(path, "output path is a directory"));
    }
    Ok(())
}

pub fn check_input_path(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(io_err(path, "input file does not exist"));
    }
    Ok(())
}

/// `{schema_version, tool_version, command, config, result}`.
pub fn envelope(command: &str, config: Value, result: impl Serialize) -> Result<Value> {
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version(),
        "command": command,
        "config": config,
        "result": to_value(result)?,
    }))
}

pub fn to_value(v: impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::NumericalFailure(format!("serialization failed: {e}")))
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values always serialize") + "\n"
}

/// Write pretty JSON and return its sha256.
pub fn write_json(path: &Path, v: &Value) -> Result<String> {
    let text = to_pretty(v);
    std::fs::write(path, &text).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(text.as_bytes()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// Instance JSON with the schema and tool version as extra top-level keys.
pub fn instance_json(inst: &StrategicInstance) -> Result<Value> {
    let mut v = to_value(inst)?;
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
        map.insert("tool_version".into(), json!(tool_version()));
    }
    Ok(v)
}

/// Reads a bare instance or one nested under `instance`, then validates it.
pub fn read_instance(path: &Path) -> Result<StrategicInstance> {
    let v: Value = read_json(path)?;
    let body = v.get("instance").cloned().unwrap_or(v);
    let inst: StrategicInstance = serde_json::from_value(body).map_err(|e| io_err(path, e))?;
    inst.validate()?;
    Ok(inst)
}

pub fn audit_csv(rows: &[AuditRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::NumericalFailure(e.to_string()))
}

pub fn curve_csv(curve: &LearningCurve) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &curve.points {
        w.serialize(p).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::NumericalFailure(e.to_string()))
}

/// Write bytes and return their sha256.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<String> {
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Hyperplane, Seminorm};
    use crate::strategic::{audit, CostModel, DataPoint, InstanceMeta};

    #[test]
    fn sha256_known_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn instance_round_trip_with_version_keys() {
        let inst = StrategicInstance::new(
            2,
            CostModel::Invariant { seminorm: Seminorm::l1(2) },
            vec![DataPoint::new(vec![1.0, 2.0], 1, 0.5)],
            InstanceMeta::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        write_json(&path, &instance_json(&inst).unwrap()).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
        let nested = dir.path().join("nested.json");
        write_json(&nested, &json!({ "instance": inst })).unwrap();
        assert_eq!(read_instance(&nested).unwrap(), inst);
    }

    #[test]
    fn audit_csv_has_one_row_per_point() {
        let inst = StrategicInstance::new(
            1,
            CostModel::Invariant { seminorm: Seminorm::l2(1) },
            vec![DataPoint::new(vec![-0.5], 1, 1.0), DataPoint::new(vec![-3.0], -1, 1.0)],
            InstanceMeta::default(),
        )
        .unwrap();
        let rows = audit(&Hyperplane::new(vec![1.0], 0.0), &inst).unwrap();
        let text = String::from_utf8(audit_csv(&rows).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "index,raw_label,br_label,signed_distance,moved,cost_spent");
    }

    #[test]
    fn output_path_checks() {
        let dir = tempfile::tempdir().unwrap();
        assert!(check_output_path(&dir.path().join("x.json")).is_ok());
        assert!(check_output_path(&dir.path().join("missing/x.json")).is_err());
        assert!(check_output_path(dir.path()).is_err());
        assert!(check_input_path(&dir.path().join("nope.json")).is_err());
    }
}
