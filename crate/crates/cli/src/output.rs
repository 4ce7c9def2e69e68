//! Deterministic CSV emission: comma separation, header row with units in
//! parentheses, floats at nine significant digits.

use std::fs;
use std::path::Path;

use crate::error::AppResult;

/// Nine-significant-digit scientific notation; the fixed width makes CSV
/// outputs byte-identical across runs.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.8e}")
    }
}

/// One CSV cell: preformatted text, a float, or an integer count.
pub enum Cell {
    Text(String),
    Float(f64),
    Count(u64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Count(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

pub struct CsvTable {
    lines: Vec<String>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            lines: vec![header.join(",")],
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let fields: Vec<String> = cells
            .into_iter()
            .map(|cell| match cell {
                Cell::Text(s) => s,
                Cell::Float(x) => fmt_float(x),
                Cell::Count(n) => n.to_string(),
            })
            .collect();
        self.lines.push(fields.join(","));
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(452.0), "4.52000000e2");
        assert_eq!(fmt_float(0.0), "0.00000000e0");
        assert_eq!(fmt_float(2.30e-5), "2.30000000e-5");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NAN), "nan");
    }
}
