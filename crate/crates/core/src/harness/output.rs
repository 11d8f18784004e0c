use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;

/// A CSV file held in memory until the pipeline has finished.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CsvTable {
    pub name: String,
    pub header: &'static str,
    pub rows: Vec<String>,
}

impl CsvTable {
    pub fn new(name: impl Into<String>, header: &'static str) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(&self.name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "{}", self.header)?;
        for r in &self.rows {
            writeln!(out, "{r}")?;
        }
        out.flush()?;
        Ok(path)
    }
}

/// Shortest round-trip representation.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
