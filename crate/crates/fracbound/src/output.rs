//! CSV and diagnostics output.
//!
//! Numbers are written with Rust's shortest round-trip float formatting:
//! locale-independent, full precision, stable across platforms.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Shortest representation that parses back to the same f64.
pub fn fmt_f64(v: f64) -> String {
    let mut buf = ryu_like(v);
    if !buf.contains(['.', 'e', 'E']) && buf.parse::<i64>().is_ok() {
        buf.push_str(".0");
    }
    buf
}

fn ryu_like(v: f64) -> String {
    if v == 0.0 && v.is_sign_negative() {
        return "0".into();
    }
    format!("{v}")
}

/// Write one CSV table.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Diagnostics accumulator: inputs echo, seed, wall time, error metrics.
pub struct Diagnostics {
    start: Instant,
    body: serde_json::Map<String, Value>,
}

impl Diagnostics {
    pub fn new(command: &str, config_echo: Value) -> Self {
        let mut body = serde_json::Map::new();
        body.insert("command".into(), json!(command));
        body.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        body.insert("config".into(), config_echo);
        Diagnostics {
            start: Instant::now(),
            body,
        }
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.body.insert(key.into(), value);
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.body.insert(
            "wall_time_seconds".into(),
            json!(self.start.elapsed().as_secs_f64()),
        );
        let path = dir.join("diagnostics.json");
        let text = serde_json::to_string_pretty(&Value::Object(self.body))?;
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

/// Resolve the output directory (creating it) from the `--out` flag.
pub fn out_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output dir {}", dir.display()))?;
    Ok(dir)
}
