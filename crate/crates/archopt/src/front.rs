//! Front files: one JSON object per line, one line per solution.
//!
//! ```text
//! {"solution_id":"r03-1","run":3,"generations":200,"genotype":[{"kind":"DROP","target":"sso","destination":null,"new_instance":null}],"objectives":{"power":61.2,"response_time":118.4,"cost":0.9,"complexity":4.5}}
//! ```
//!
//! A saturated deployment stores `"response_time": "infeasible"`.

use std::fs;
use std::io::Write;
use std::path::Path;

use archopt_core::nsga2::Solution;
use archopt_core::{ObjectiveVector, RefactoringSequence};
use serde::{Deserialize, Serialize};

use crate::io::{read_text, LoadError};

pub const INFEASIBLE: &str = "infeasible";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub solution_id: String,
    pub run: usize,
    pub generations: usize,
    pub genotype: RefactoringSequence,
    #[serde(with = "objectives_format")]
    pub objectives: ObjectiveVector,
}

impl Solution for FrontRow {
    fn genotype(&self) -> &RefactoringSequence {
        &self.genotype
    }
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

/// `ObjectiveVector` with the infinite response time written as a string.
pub mod objectives_format {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Millis {
        Value(f64),
        Tag(String),
    }

    #[derive(Serialize, Deserialize)]
    struct Record {
        power: f64,
        response_time: Millis,
        cost: f64,
        complexity: f64,
    }

    pub fn serialize<S: Serializer>(v: &ObjectiveVector, s: S) -> Result<S::Ok, S::Error> {
        Record {
            power: v.power,
            response_time: if v.response_time.is_finite() {
                Millis::Value(v.response_time)
            } else {
                Millis::Tag(INFEASIBLE.into())
            },
            cost: v.cost,
            complexity: v.complexity,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ObjectiveVector, D::Error> {
        let r = Record::deserialize(d)?;
        let response_time = match r.response_time {
            Millis::Value(v) => v,
            Millis::Tag(t) if t == INFEASIBLE => f64::INFINITY,
            Millis::Tag(t) => {
                return Err(serde::de::Error::custom(format!(
                    "expected a number or \"{INFEASIBLE}\", found \"{t}\""
                )))
            }
        };
        Ok(ObjectiveVector {
            power: r.power,
            response_time,
            cost: r.cost,
            complexity: r.complexity,
        })
    }
}

pub fn to_jsonl(rows: &[FrontRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("front row serializes"));
        out.push('\n');
    }
    out
}

pub fn write_front(path: &Path, rows: &[FrontRow]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_jsonl(rows).as_bytes())
}

pub fn parse_front(text: &str) -> Result<Vec<FrontRow>, LoadError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LoadError::Parse {
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_front(path: &Path) -> Result<Vec<FrontRow>, LoadError> {
    parse_front(&read_text(path)?)
}

/// Reads a front file, or pools every `run-*.jsonl` of an experiment
/// directory in file-name order.
pub fn read_pooled(path: &Path) -> Result<Vec<FrontRow>, LoadError> {
    if !path.is_dir() {
        return read_front(path);
    }
    let io_err = |source| LoadError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut files: Vec<_> = fs::read_dir(path)
        .map_err(io_err)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io_err)?;
    files.retain(|p| {
        p.file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("run-") && n.ends_with(".jsonl"))
    });
    files.sort();
    let mut rows = Vec::new();
    for f in files {
        rows.extend(read_front(&f)?);
    }
    Ok(rows)
}
