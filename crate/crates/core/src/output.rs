//! Plain-text output: CSV tables with 17 significant digits and JSON manifests.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt17(*v),
            Cell::Text(t) => {
                if t.contains([',', '"', '\n']) {
                    format!("\"{}\"", t.replace('"', "\"\""))
                } else {
                    t.clone()
                }
            }
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Text(t) => t.clone().into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A table with a mandatory header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Float value at `(row, column name)`, integers are widened.
    pub fn float(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    /// Text value at `(row, column name)`.
    pub fn text(&self, row: usize, name: &str) -> Option<&str> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Text(t) => Some(t),
            _ => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Array of objects whose keys follow the column order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| {
                    let value = match v {
                        Cell::Float(x) if x.is_finite() => fmt17(*x),
                        other => other.to_json().to_string(),
                    };
                    format!("{}: {}", serde_json::Value::from(c.as_str()), value)
                })
                .collect();
            let _ = write!(out, "  {{{}}}", fields.join(", "));
            out.push_str(if i + 1 < self.rows.len() { ",\n" } else { "\n" });
        }
        out.push(']');
        out.push('\n');
        out
    }
}

/// Output format selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn render(self, table: &Table) -> String {
        match self {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        }
    }
}

/// Writes `value` as pretty JSON; struct fields keep declaration order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::E] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt17(0.5625), "5.6250000000000000e-1");
    }

    #[test]
    fn csv_has_header_and_quotes_text() {
        let mut t = Table::new(&["name", "n", "value"]);
        t.push(vec!["a,b".into(), 3usize.into(), 0.25.into()]);
        assert_eq!(t.to_csv(), "name,n,value\n\"a,b\",3,2.5000000000000000e-1\n");
        assert_eq!(t.float(0, "value"), Some(0.25));
        assert_eq!(t.float(0, "n"), Some(3.0));
    }

    #[test]
    fn json_rows_parse() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec!["x".into(), 1.5.into()]);
        t.push(vec!["y".into(), f64::NAN.into()]);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["v"], 1.5);
        assert!(v[1]["v"].is_null());
    }
}
