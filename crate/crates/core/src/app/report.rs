//! Machine-readable check reports, written one JSON object per line.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check_name: String,
    pub inputs: serde_json::Value,
    pub value: String,
    pub error_bound: Option<f64>,
    pub pass: bool,
    pub runtime_ms: u64,
    /// Scope limits and diagnostics; `null` when there is nothing to add.
    pub notes: Option<String>,
}

impl Report {
    /// One human-readable line.
    pub fn summary(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let bound = self.error_bound.map(|b| format!(" (error bound {b:.3e})")).unwrap_or_default();
        format!("[{status}] {} {}: {}{bound} in {} ms", self.check_name, self.inputs, self.value, self.runtime_ms)
    }
}

/// Appends reports to a JSON Lines file that is truncated when opened.
pub struct ReportSink {
    file: File,
}

impl ReportSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        File::create(path.as_ref())?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(ReportSink { file })
    }

    pub fn append(&mut self, report: &Report) -> Result<()> {
        let line = serde_json::to_string(report).map_err(|e| crate::Error::Io(e.to_string()))?;
        writeln!(self.file, "{line}")?;
        self.file.flush()?;
        Ok(())
    }
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<Report>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| crate::Error::Io(e.to_string())))
        .collect()
}
