use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{HaystackExample, SCHEMA_VERSION};
use crate::{Error, Result};

/// Writes to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

fn malformed(path: &Path, line: usize, message: impl ToString) -> Error {
    Error::Malformed {
        path: path.display().to_string(),
        line,
        message: message.to_string(),
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| malformed(path, i + 1, e))?);
    }
    Ok(out)
}

pub fn write_dataset(path: &Path, examples: &[HaystackExample]) -> Result<()> {
    write_jsonl(path, examples)
}

/// Reads a dataset, rejecting records from another schema version.
pub fn read_dataset(path: &Path) -> Result<Vec<HaystackExample>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| malformed(path, i + 1, e))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::SchemaVersion {
                    found: v as u32,
                    expected: SCHEMA_VERSION,
                })
            }
            None => return Err(malformed(path, i + 1, "missing version field")),
        }
        out.push(serde_json::from_value(value).map_err(|e| malformed(path, i + 1, e))?);
    }
    Ok(out)
}
