//! Tabular output. CSV numbers carry 17 significant digits in scientific
//! notation so that every f64 round-trips; non-finite values are written as
//! empty fields. JSON emits an array of objects with keys in column order.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::settings::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(_) | Cell::Empty => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// All values of a column, in row order.
    pub fn values(&self, name: &str) -> Vec<&Cell> {
        let i = self.column(name).unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| &r[i]).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv_field))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(k, v)| ((*k).to_owned(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> Result<(), CliError> {
        let wrap = |e: io::Error| CliError::io("writing output", e);
        match format {
            Format::Csv => self.write_csv(w).map_err(|e| wrap(e.into())),
            Format::Json => self.write_json(w).map_err(wrap),
        }
    }

    /// Write to `path`, or to standard output when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
                let mut w = BufWriter::new(file);
                self.write(format, &mut w)?;
                w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
            }
            None => self.write(format, io::stdout().lock()),
        }
    }
}
