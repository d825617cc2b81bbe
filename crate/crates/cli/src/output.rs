//! Rendering of command results as JSON or CSV.
//!
//! A result is any serializable value. For CSV, a top-level array becomes one
//! row per element and an object becomes a single row; nested objects are
//! flattened into dotted column names and numeric arrays are joined with `;`.
//! Floats are written with 17 significant digits.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::CliError;

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn scalar(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => u.to_string(),
            (_, Some(i)) if !n.is_f64() => i.to_string(),
            _ => float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(";"),
        Value::Object(_) => serde_json::to_string(value).unwrap_or_default(),
    }
}

fn flatten(prefix: &str, value: &Value, row: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                let name = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&name, v, row);
            }
        }
        other => row.push((prefix.to_string(), scalar(other))),
    }
}

pub fn to_csv(value: &Value) -> Result<String, CliError> {
    let records: Vec<&Value> = match value {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    let rows: Vec<Vec<(String, String)>> = records
        .into_iter()
        .map(|v| {
            let mut row = Vec::new();
            flatten("", v, &mut row);
            row
        })
        .collect();
    let mut headers: Vec<String> = Vec::new();
    for row in &rows {
        for (key, _) in row {
            if !headers.contains(key) {
                headers.push(key.clone());
            }
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&headers).map_err(CliError::internal)?;
    for row in &rows {
        let record: Vec<&str> = headers
            .iter()
            .map(|h| {
                row.iter()
                    .find(|(k, _)| k == h)
                    .map_or("", |(_, v)| v.as_str())
            })
            .collect();
        writer.write_record(&record).map_err(CliError::internal)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::internal(e.into_error()))?;
    String::from_utf8(bytes).map_err(CliError::internal)
}

pub fn render(value: &Value, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(value).map_err(CliError::internal)?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => to_csv(value),
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(CliError::internal)
        }
    }
}

/// Builds a JSON object from `(key, value)` pairs, keeping their order.
pub fn object<I, K>(pairs: I) -> Value
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    Value::Object(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect::<Map<_, _>>())
}
