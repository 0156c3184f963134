//! CSV emission: UTF-8, comma-separated, mandatory header row, all floats
//! in round-trip scientific notation.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub struct Csv {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

/// Shortest round-trip scientific representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

impl Csv {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Write to the file at `path`, or to stdout when no path is given.
    pub fn write(&self, path: Option<&Path>) -> io::Result<()> {
        let text = self.to_string();
        match path {
            Some(p) => fs::write(p, text),
            None => io::stdout().write_all(text.as_bytes()),
        }
    }
}
