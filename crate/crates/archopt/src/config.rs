//! Experiment configuration file (JSON). Every field is optional and
//! defaults to 16 individuals, 200 generations, crossover 0.8, mutation 0.2,
//! 31 runs, sequences of at most 4 actions, k = 0.3 and the default
//! complexity catalog.

use std::path::Path;

use archopt_core::nsga2::ExperimentConfig;
use archopt_core::objectives::Problem;
use archopt_core::{Architecture, ComplexityCatalog, PowerParams};
use serde::{Deserialize, Serialize};

use crate::io::{read_text, LoadError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Config {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub k: PowerParams,
    #[serde(default)]
    pub complexity: ComplexityCatalog,
}

impl Config {
    pub fn problem(&self, initial: Architecture) -> Problem {
        Problem {
            initial,
            power: self.k,
            complexity: self.complexity.clone(),
            objectives: self.experiment.objectives,
        }
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_config(path: &Path) -> Result<Config, LoadError> {
    parse(&read_text(path)?)
}

/// Reads a `{"MOVE": 2, "REDO": 2, ...}` file.
pub fn load_complexity_catalog(path: &Path) -> Result<ComplexityCatalog, LoadError> {
    parse(&read_text(path)?)
}
