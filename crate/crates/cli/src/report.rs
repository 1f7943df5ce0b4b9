//! Run reports: ordered key/value rows written as two-column CSV.
//!
//! Timing rows use keys containing `time`; everything else reproduces
//! exactly when a command reruns with the same seed.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    rows: Vec<(String, String)>,
}

impl RunReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.rows.push((key.into(), value.to_string()));
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.rows {
            out.push_str(k);
            out.push(',');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(self.to_csv().as_bytes())?;
        out.flush()?;
        Ok(())
    }
}
