//! Data ingestion and result serialization.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use vkde::sample::Sample;

use crate::error::CliError;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// Parses numeric rows; `#` starts a comment, fields are separated by commas
/// and/or whitespace. Every row must have the same number of fields.
pub fn parse_rows(text: &str) -> Result<(Vec<f64>, usize), CliError> {
    let mut values = Vec::new();
    let mut dim = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| {
                CliError::Data(format!("line {}: `{tok}` is not a number", lineno + 1))
            })?;
            values.push(v);
            count += 1;
        }
        if dim == 0 {
            dim = count;
        } else if count != dim {
            return Err(CliError::Data(format!(
                "line {}: expected {dim} columns, found {count}",
                lineno + 1
            )));
        }
    }
    Ok((values, dim))
}

pub fn load_sample(path: &Path) -> Result<Sample, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let (values, dim) = parse_rows(&text)?;
    if values.is_empty() {
        return Err(CliError::Data(format!("{} contains no observations", path.display())));
    }
    Sample::new(values, dim).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_sample(path: &Path, sample: &Sample) -> Result<(), CliError> {
    let rows: Vec<Vec<f64>> = sample.rows().map(|r| r.to_vec()).collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// CSV with a header and numeric columns.
pub fn write_csv(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<(), CliError> {
    write_text(path, &csv_string(header, columns))
}

pub fn csv_string(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(col[i]));
        }
        out.push('\n');
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}
