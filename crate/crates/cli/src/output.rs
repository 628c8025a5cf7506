//! Report formatting: deterministic float rendering, CSV assembly, and the
//! stdout-or-file writer.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};

/// Formats a float with a fixed 16-digit scientific mantissa so reports are
/// byte-identical across runs and platforms. Negative zero prints as zero.
pub fn float(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.16e}")
}

/// Formats an optional float, rendering `None` as an empty CSV field.
pub fn opt_float(value: Option<f64>) -> String {
    value.map(float).unwrap_or_default()
}

/// Renders an index map as a bare JSON array, e.g. `[0,2,1,3]`.
pub fn index_list(map: &[usize]) -> String {
    let body = map
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("[{body}]")
}

/// Renders an index map as a quoted JSON array CSV field, e.g. `"[0,2,1,3]"`.
pub fn index_array(map: &[usize]) -> String {
    format!("\"{}\"", index_list(map))
}

/// Renders a probability vector as a quoted JSON array of formatted floats.
pub fn float_array(values: &[f64]) -> String {
    let body = values
        .iter()
        .map(|&v| float(v))
        .collect::<Vec<_>>()
        .join(",");
    format!("\"[{body}]\"")
}

/// Builds a CSV document: a header row plus one line per record.
pub fn csv(header: &str, rows: &[String]) -> String {
    let mut doc = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    doc.push_str(header);
    doc.push('\n');
    for row in rows {
        doc.push_str(row);
        doc.push('\n');
    }
    doc
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut doc = serde_json::to_string_pretty(value).context("serializing report")?;
    doc.push('\n');
    Ok(doc)
}

/// Writes the finished report to the chosen destination in one shot.
pub fn write_report(destination: &Option<PathBuf>, content: &str) -> Result<()> {
    match destination {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing report to {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|()| stdout.flush())
                .context("writing report to stdout")
        }
    }
}
