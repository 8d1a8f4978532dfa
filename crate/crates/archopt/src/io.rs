//! Reading and writing the JSON model format.

use std::fs;
use std::path::Path;

use archopt_core::{Architecture, Violation};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{} violation(s): {}", .0.len(), join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl LoadError {
    /// Parse and IO problems, as opposed to model invariant violations.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, LoadError::Invalid(_))
    }
}

/// Parses without validating.
pub fn parse_unchecked(text: &str) -> Result<Architecture, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses and validates; every violation is reported.
pub fn parse_architecture(text: &str) -> Result<Architecture, LoadError> {
    let arch = parse_unchecked(text)?;
    let violations = arch.validate();
    if violations.is_empty() {
        Ok(arch)
    } else {
        Err(LoadError::Invalid(violations))
    }
}

pub fn read_text(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_architecture(path: &Path) -> Result<Architecture, LoadError> {
    parse_architecture(&read_text(path)?)
}

/// Canonical pretty-printed JSON.
pub fn to_json(arch: &Architecture) -> String {
    let mut s = serde_json::to_string_pretty(arch).expect("architecture serializes");
    s.push('\n');
    s
}

pub fn save_architecture(arch: &Architecture, path: &Path) -> std::io::Result<()> {
    fs::write(path, to_json(arch))
}
