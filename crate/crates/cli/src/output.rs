use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.csv()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'static str,
    generator_version: &'static str,
    seed: u64,
    d: usize,
    theta: f64,
    format: Format,
    flags: &'a Value,
    files: &'a [String],
    summary: &'a Value,
}

/// Collects the files written by one subcommand and finishes with the
/// metadata record.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    fn write(&mut self, name: String, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(&name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(contents.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        self.written.push(name);
        Ok(path)
    }

    /// Writes `table` as `<name>.csv` or `<name>.json` depending on the format.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => self.csv(name, table),
            Format::Json => self.json(name, table),
        }
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<PathBuf, CliError> {
        self.write(format!("{name}.csv"), &table.to_csv())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(format!("{name}.json"), &s)
    }

    /// Registers a file written by someone else into the sink directory.
    pub fn record(&mut self, path: &Path) {
        if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
            self.written.push(name.to_string());
        }
    }

    pub fn finish(
        mut self,
        stem: &str,
        command: &str,
        global: &crate::GlobalArgs,
        flags: Value,
        summary: Value,
    ) -> Result<PathBuf, CliError> {
        let files = self.written.clone();
        let meta = Metadata {
            command,
            version: env!("CARGO_PKG_VERSION"),
            generator_version: qudit_phase::quasiprob::GENERATOR_VERSION,
            seed: global.seed,
            d: global.d,
            theta: global.theta,
            format: global.format,
            flags: &flags,
            files: &files,
            summary: &summary,
        };
        let mut s = serde_json::to_string_pretty(&meta)?;
        s.push('\n');
        self.write(format!("{stem}.meta.json"), &s)
    }
}

/// Husimi values in `[-1e-12, 0)` are printed as zero.
pub fn clamp_small_negative(x: f64) -> f64 {
    if (-1e-12..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_round_trip_exact() {
        let mut t = Table::new(&["a", "x"]);
        let x = 0.1 + 0.2;
        t.push(vec![3usize.into(), x.into()]);
        let csv = t.to_csv();
        let field = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), x);
        assert!(csv.starts_with("a,x\n3,"));
    }

    #[test]
    fn clamp_window() {
        assert_eq!(clamp_small_negative(-1e-13), 0.0);
        assert_eq!(clamp_small_negative(-1e-11), -1e-11);
        assert_eq!(clamp_small_negative(0.25), 0.25);
    }

    #[test]
    fn table_json_shape() {
        let mut t = Table::new(&["d", "h"]);
        t.push(vec![2usize.into(), 0.5.into()]);
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["columns"][1], "h");
        assert_eq!(v["rows"][0][0], 2);
        assert_eq!(v["rows"][0][1], 0.5);
    }
}
