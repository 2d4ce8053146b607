//! CSV tables with a `# key: value` metadata preamble.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! gives the same bits.

use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PartialEq for Table {
    /// Bitwise on the values, so NaN placeholders compare equal.
    fn eq(&self, other: &Self) -> bool {
        self.metadata == other.metadata
            && self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed table: {0}")]
    Format(String),
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.metadata.push((key.into(), value));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), TableError> {
        for (k, v) in &self.metadata {
            if k.contains(':') || k.contains('\n') {
                return Err(TableError::Format(format!("metadata key {k:?} may not contain ':' or newlines")));
            }
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), TableError> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self, TableError> {
        let mut metadata = Vec::new();
        let header = loop {
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                return Err(TableError::Format("no header line".into()));
            }
            let line = line.trim_end_matches(['\n', '\r']);
            match line.strip_prefix("# ") {
                Some(entry) => {
                    let (k, v) = entry
                        .split_once(": ")
                        .or_else(|| entry.strip_suffix(':').map(|k| (k, "")))
                        .ok_or_else(|| TableError::Format(format!("metadata line without ': ': {line}")))?;
                    metadata.push((k.to_string(), v.to_string()));
                }
                None => break line.to_string(),
            }
        };
        let columns: Vec<String> = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(header.as_bytes())
            .records()
            .next()
            .ok_or_else(|| TableError::Format("empty header".into()))??
            .iter()
            .map(str::to_string)
            .collect();
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        let mut rows = Vec::new();
        for record in reader.deserialize::<Vec<f64>>() {
            let row = record?;
            if row.len() != columns.len() {
                return Err(TableError::Format(format!("row with {} fields, header has {}", row.len(), columns.len())));
            }
            rows.push(row);
        }
        Ok(Table { metadata, columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self, TableError> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(
            rows in prop::collection::vec(prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO | prop::num::f64::INFINITE, 3), 0..20),
            value in "[ -~]{0,30}",
        ) {
            let mut t = Table::new(&["x", "re psi", "|j|"]);
            t.meta("scenario", "custom");
            t.meta("config.source.energy", &value);
            for r in rows {
                t.push(r);
            }
            let mut buf = Vec::new();
            t.write_to(&mut buf).unwrap();
            let back = Table::read_from(buf.as_slice()).unwrap();
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn nan_and_extremes_survive() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![f64::NAN, 1e-310]);
        t.push(vec![f64::INFINITY, -0.0]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(Table::read_from(buf.as_slice()).unwrap(), t);
    }
}
