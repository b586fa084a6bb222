use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Provenance block shared by every artifact.
pub fn provenance<T: Serialize>(command: &str, options: &T) -> Value {
    json!({
        "tool": "ptssh",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "options": options,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    body.push('\n');
    write_atomic(path, &body)
}

/// CSV body plus a JSON sidecar holding provenance and `summary`.
pub fn write_csv_with_sidecar(path: &Path, csv: &str, provenance: Value, summary: Value) -> Result<(), CliError> {
    write_atomic(path, csv)?;
    write_json(&sidecar_path(path), &json!({ "provenance": provenance, "summary": summary }))
}
