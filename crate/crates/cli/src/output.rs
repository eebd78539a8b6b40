//! Delimited-text output: comma-separated, header row, numbers with 12
//! significant digits in scientific notation.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// `1.23456789012e-1` style; negative zero prints as zero.
pub fn num(v: f64) -> String {
    format!("{:.11e}", v + 0.0)
}

/// Fields containing commas or quotes are quoted.
pub fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for record in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        w.write_record(record).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("utf-8 fields")
}

pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    fs::write(path, render_table(header, rows))
        .with_context(|| format!("writing {}", path.display()))
}
