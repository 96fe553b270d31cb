//! Deterministic artifact writers.
//!
//! Every run artifact is either JSON (structured reports, run records) or
//! CSV (plottable series). Writers never embed timestamps, hostnames, or
//! other environment noise, so identical inputs produce byte-identical
//! files; floating-point values are written in shortest round-trip form.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

/// Writes `value` as pretty JSON with a trailing newline, creating parent
/// directories as needed.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes an (abscissa, value) series as a two-column CSV.
pub fn write_series_csv(
    path: &Path,
    columns: (&str, &str),
    rows: &[(f64, f64)],
) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([columns.0, columns.1])?;
    for &(x, y) in rows {
        w.write_record([format_float(x), format_float(y)])?;
    }
    w.flush()
}

/// Writes arbitrary serializable records with a header row.
pub fn write_records_csv<T: Serialize>(path: &Path, rows: &[T]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

/// Shortest round-trip decimal form of an f64 (Display is shortest
/// round-trip; a `.0` suffix keeps integer-valued floats typed as floats).
pub fn format_float(v: f64) -> String {
    let mut buf = format!("{v}");
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}
