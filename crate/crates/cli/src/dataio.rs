//! Dataset CSV and result JSON formats.
//!
//! Dataset files carry one source per row under the header `y,a,b`: photon
//! count (nonnegative integer), effective area (counts per unit flux,
//! positive), expected background count (nonnegative). Plain decimal and
//! scientific notation are both accepted. Errors name the offending line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lognlogs::{Dataset, ObservedSource};
use serde::Serialize;

use crate::CliError;

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "y,a,b" => {}
        Some((_, header)) => {
            return Err(CliError::Data(format!(
                "{}: line 1: expected header 'y,a,b', found '{}'",
                path.display(),
                header.trim()
            )))
        }
        None => return Err(CliError::Data(format!("{}: empty file", path.display()))),
    }
    let mut sources = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Data(format!(
                "{}: line {line_no}: expected 3 fields, found {}",
                path.display(),
                fields.len()
            )));
        }
        let y: u64 = fields[0].trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}: line {line_no}: count '{}' is not a nonnegative integer",
                path.display(),
                fields[0].trim()
            ))
        })?;
        let a: f64 = fields[1].trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}: line {line_no}: effective area '{}' is not a number",
                path.display(),
                fields[1].trim()
            ))
        })?;
        let b: f64 = fields[2].trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}: line {line_no}: background '{}' is not a number",
                path.display(),
                fields[2].trim()
            ))
        })?;
        let source = ObservedSource::new(y, a, b).map_err(|e| {
            CliError::Data(format!("{}: line {line_no}: {e}", path.display()))
        })?;
        sources.push(source);
    }
    Dataset::new(sources)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn dataset_csv(data: &Dataset) -> String {
    let mut out = String::from("y,a,b\n");
    for s in data.sources() {
        let _ = writeln!(out, "{},{:e},{:e}", s.y, s.a, s.b);
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Rows of a log N-log S curve file: `series,log10_s,log10_n` with series
/// one of `empirical`, `fit`, `breakpoint`.
pub fn curve_csv(
    empirical: &[(f64, f64)],
    overlay: &[(f64, f64)],
    breakpoints: &[(f64, f64)],
) -> String {
    let mut out = String::from("series,log10_s,log10_n\n");
    for (x, y) in empirical {
        let _ = writeln!(out, "empirical,{x:e},{y:e}");
    }
    for (x, y) in overlay {
        let _ = writeln!(out, "fit,{x:e},{y:e}");
    }
    for (x, y) in breakpoints {
        let _ = writeln!(out, "breakpoint,{x:e},{y:e}");
    }
    out
}

/// Read `beta`/`tau` arrays back out of a fit JSON.
pub fn read_fit_params(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: invalid JSON: {e}", path.display())))?;
    let arr = |key: &str| -> Result<Vec<f64>, CliError> {
        value
            .get(key)
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|x| x.as_f64()).collect::<Vec<f64>>())
            .filter(|v: &Vec<f64>| !v.is_empty())
            .ok_or_else(|| {
                CliError::Data(format!(
                    "{}: missing numeric array '{key}'",
                    path.display()
                ))
            })
    };
    Ok((arr("beta")?, arr("tau")?))
}
