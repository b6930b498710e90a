use std::io::Write;

use serde::Serialize;
use serde_json::Value;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope shared by every machine-readable report.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub tool_version: &'static str,
    pub m: u32,
    pub poly: String,
    pub command: &'static str,
    pub results: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, m: u32, poly: u32, results: T) -> Self {
        Report { tool_version: TOOL_VERSION, m, poly: format!("{poly:#x}"), command, results }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub fn emit<T: Serialize, W: Write>(report: &Report<T>, format: Format, mut out: W) -> std::io::Result<()> {
    let value = serde_json::to_value(report).map_err(std::io::Error::other)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &value).map_err(std::io::Error::other)?;
            writeln!(out)
        }
        Format::Csv => {
            writeln!(out, "key,value")?;
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            for (k, v) in rows {
                writeln!(out, "{},{}", csv_field(&k), csv_field(&v))?;
            }
            Ok(())
        }
    }
}

/// Flattens nested objects and arrays into dotted-path rows.
fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
