//! Report files: fixed-precision numbers and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::NamedTempFile;

pub const RATE_DECIMALS: usize = 10;
pub const BPS_DECIMALS: usize = 2;

pub fn fmt_rate(x: f64) -> String {
    format!("{x:.RATE_DECIMALS$}")
}

pub fn fmt_bps(x: f64) -> String {
    format!("{x:.BPS_DECIMALS$}")
}

fn round_to(x: f64, decimals: usize) -> Value {
    // going through the printed form keeps JSON and CSV digits identical
    let s = format!("{x:.decimals$}");
    s.parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

pub fn json_rate(x: f64) -> Value {
    round_to(x, RATE_DECIMALS)
}

pub fn json_bps(x: f64) -> Value {
    round_to(x, BPS_DECIMALS)
}

pub fn json_opt(x: Option<f64>, f: fn(f64) -> Value) -> Value {
    x.map_or(Value::Null, f)
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers see either the old file or the complete new one.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

pub fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("JSON values always serialize");
    out.push(b'\n');
    out
}
