//! Artifact writing shared by the commands.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create output directory {}: {e}", dir.display())))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Timing data kept apart from the deterministic artifacts.
pub fn write_meta(dir: &Path, command: &str, started: SystemTime) -> CliResult<()> {
    let finished = SystemTime::now();
    let elapsed = finished.duration_since(started).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    write_json(
        dir,
        "meta.json",
        &json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "started_unix": unix_seconds(started),
            "finished_unix": unix_seconds(finished),
            "elapsed_seconds": elapsed,
        }),
    )
}

pub fn fmt(v: f64) -> String {
    v.to_string()
}
