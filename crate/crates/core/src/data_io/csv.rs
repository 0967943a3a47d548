use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Parses comma-separated rows into a matrix. A first line whose cells do
/// not all parse as numbers is taken as a header and skipped. Blank lines are
/// ignored; line numbers in errors are 1-based and count every line.
pub fn parse_csv_matrix(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut seen_first = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            cells.iter().map(|c| c.parse::<f64>()).collect();
        let first = !seen_first;
        seen_first = true;
        let values = match parsed {
            Ok(v) => v,
            Err(_) if first => continue,
            Err(_) => {
                let bad = cells.iter().find(|c| c.parse::<f64>().is_err()).unwrap();
                return Err(Error::format(
                    line_no,
                    format!("cannot parse '{bad}' as a number"),
                ));
            }
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::format(line_no, format!("non-finite value {bad}")));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::format(
                    line_no,
                    format!("expected {w} columns, found {}", values.len()),
                ))
            }
            _ => {}
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::format(
            text.lines().count().max(1),
            "no numeric rows",
        ));
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    DenseMatrix::from_rows(&refs)
}

pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_matrix(&text)
}

/// 17 significant digits, enough to round-trip every `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_csv_matrix(a: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(a.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv_matrix(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_csv_matrix(a)).map_err(|e| Error::io(path, e))
}

/// One label per line under a `label` header.
pub fn write_labels(labels: &[i64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("label\n");
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a single-column label file (header optional).
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let m = read_csv_matrix(path)?;
    if m.cols() != 1 {
        return Err(Error::format(
            1,
            format!("label file has {} columns, expected 1", m.cols()),
        ));
    }
    m.data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.fract() == 0.0 && v.abs() < 1e15 {
                Ok(v as i64)
            } else {
                Err(Error::format(i + 1, format!("label {v} is not an integer")))
            }
        })
        .collect()
}
