//! Deterministic CSV and JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Shortest round-trip representation, always with a decimal point or exponent.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: Iterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(",")).map_err(|e| io_err(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(w, "{}", row.join(",")).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
