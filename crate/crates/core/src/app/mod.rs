//! CLI, newform coefficient files, and verification reports.

pub mod checks;
pub mod cli;
pub mod newform_file;
pub mod report;

pub use checks::{run_check, Check, Settings};
pub use newform_file::{ingest_newform, serialize_newform};
pub use report::Report;
