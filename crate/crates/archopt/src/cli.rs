//! Command-line interface.
//!
//! Exit status: 0 on success, 1 when the input violates a model or
//! configuration rule, 2 when a file cannot be read, parsed or written.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use archopt_core::nsga2::ConfigError;
use archopt_core::stats::action_frequencies;
use archopt_core::{Architecture, Objective, ObjectiveSet, PowerParams, RefactoringSequence};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{load_complexity_catalog, load_config, Config};
use crate::experiment::{run_experiment, thread_count, write_output};
use crate::front::{objectives_format, read_front, read_pooled};
use crate::io::{parse_architecture, read_text, LoadError};
use crate::report::{
    actions_csv, attribute_front, attribution_csv, compare, psp_csv, summarize, summary_csv, ReportError,
};

#[derive(Debug, Parser)]
#[command(
    name = "archopt",
    version,
    about = "Power-aware refactoring of microservice deployments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file against every structural rule.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Evaluate a model, optionally after applying a refactoring sequence.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        /// JSON array of refactoring actions.
        #[arg(long)]
        sequence: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run the multi-objective search and write the fronts.
    Optimize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Compare the baseline and power-aware experiments objective by objective.
    Compare {
        /// Experiment directory (its run fronts are pooled) or a front file.
        #[arg(long)]
        baseline: PathBuf,
        /// Experiment directory (its run fronts are pooled) or a front file.
        #[arg(long)]
        power_aware: PathBuf,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attribute power and cost to request types for every solution of a front.
    Attribute {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        front: PathBuf,
        /// Directory receiving attribution.csv and summary.csv.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Count refactoring actions in one or more fronts.
    ActionsReport {
        /// `NAME=FILE`, repeatable.
        #[arg(long = "front", required = true, value_parser = parse_named)]
        fronts: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON configuration file; the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// `baseline`, `power-aware`, or a comma-separated objective list.
    #[arg(long, value_parser = parse_objectives)]
    pub objectives: Option<ObjectiveSet>,
    /// Idle power as a fraction of maximum power.
    #[arg(long)]
    pub k: Option<f64>,
    /// JSON file mapping each action kind to its base complexity.
    #[arg(long)]
    pub complexity_catalog: Option<PathBuf>,
}

fn parse_named(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.into(), path.into())),
        _ => Err(format!("expected NAME=FILE, found `{s}`")),
    }
}

pub fn parse_objectives(s: &str) -> Result<ObjectiveSet, String> {
    match s {
        "baseline" => return Ok(ObjectiveSet::BASELINE),
        "power-aware" => return Ok(ObjectiveSet::POWER_AWARE),
        _ => {}
    }
    s.split(',')
        .map(|name| Objective::parse(name.trim()).map_err(|e| e.to_string()))
        .collect()
}

#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) => m,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        let msg = match &e {
            LoadError::Invalid(vs) => {
                let mut m = format!("{} rule violation(s):", vs.len());
                for v in vs {
                    m.push_str(&format!("\n  {v}"));
                }
                m
            }
            other => other.to_string(),
        };
        if e.is_input_error() {
            CliError::Input(msg)
        } else {
            CliError::Domain(msg)
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Domain(format!("invalid configuration: {e}"))
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

impl ParamArgs {
    fn resolve(&self) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => Config::default(),
        };
        if let Some(s) = self.seed {
            c.experiment.seed = s;
        }
        if let Some(r) = self.runs {
            c.experiment.runs = r;
        }
        if let Some(o) = self.objectives {
            c.experiment.objectives = o;
        }
        if let Some(k) = self.k {
            c.k = PowerParams::new(k).map_err(|e| CliError::Domain(e.to_string()))?;
        }
        if let Some(p) = &self.complexity_catalog {
            c.complexity = load_complexity_catalog(p)?;
        }
        c.experiment.validate()?;
        Ok(c)
    }
}

fn load_model(path: &Path) -> Result<(Architecture, String), CliError> {
    let text = read_text(path)?;
    let arch = parse_architecture(&text)?;
    Ok((arch, text))
}

fn cmd_validate(model: &Path) -> Result<String, CliError> {
    let (arch, _) = load_model(model)?;
    Ok(format!(
        "valid: {} nodes, {} components, {} operations, {} scenarios\n",
        arch.nodes.len(),
        arch.components.len(),
        arch.operations.len(),
        arch.scenarios.len()
    ))
}

fn cmd_evaluate(model: &Path, sequence: Option<&Path>, params: &ParamArgs) -> Result<String, CliError> {
    let (arch, _) = load_model(model)?;
    let config = params.resolve()?;
    let seq: RefactoringSequence = match sequence {
        Some(p) => {
            let text = read_text(p)?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => RefactoringSequence::empty(),
    };
    let e = config
        .problem(arch)
        .evaluate(&seq)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let objectives =
        objectives_format::serialize(&e.objectives, serde_json::value::Serializer).expect("objectives serialize");
    let out = json!({
        "feasible": e.result.feasible,
        "objectives": objectives,
        "node_utilization": e.result.node_utilization,
        "scenario_response": e.result.scenario_response
            .iter()
            .map(|(k, v)| (k.clone(), if v.is_finite() { json!(v) } else { json!("infeasible") }))
            .collect::<serde_json::Map<_, _>>(),
        "nodes": e.architecture.nodes.len(),
    });
    Ok(format!(
        "{}\n",
        serde_json::to_string_pretty(&out).expect("json output")
    ))
}

fn cmd_optimize(model: &Path, out: &Path, params: &ParamArgs) -> Result<String, CliError> {
    let (arch, text) = load_model(model)?;
    let config = params.resolve()?;
    let threads = thread_count();
    let result =
        run_experiment(&config.problem(arch), &config, &text, threads).map_err(|e| CliError::Domain(e.to_string()))?;
    write_output(out, &result).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    Ok(format!(
        "{} runs, {} solutions on the super-front, written to {}\n",
        result.runs.len(),
        result.super_front.len(),
        out.display()
    ))
}

fn cmd_compare(baseline: &Path, power_aware: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let b = read_pooled(baseline)?;
    let p = read_pooled(power_aware)?;
    let text = psp_csv(&compare(&b, &p)?);
    match out {
        Some(path) => write_file(path, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

fn cmd_attribute(model: &Path, front: &Path, out: &Path, params: &ParamArgs) -> Result<String, CliError> {
    let (arch, _) = load_model(model)?;
    let config = params.resolve()?;
    let rows = read_front(front)?;
    let lines = attribute_front(&config.problem(arch), &rows)?;
    write_file(&out.join("attribution.csv"), &attribution_csv(&lines))?;
    write_file(&out.join("summary.csv"), &summary_csv(&summarize(&lines)))?;
    Ok(String::new())
}

fn cmd_actions_report(fronts: &[(String, PathBuf)], out: Option<&Path>) -> Result<String, CliError> {
    let mut reports = Vec::new();
    for (name, path) in fronts {
        reports.push((name.as_str(), action_frequencies(&read_front(path)?)));
    }
    let refs: Vec<(&str, _)> = reports.iter().map(|(n, r)| (*n, r)).collect();
    let text = actions_csv(&refs);
    match out {
        Some(path) => write_file(path, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

/// Runs a parsed command and returns what it prints on standard output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate { model } => cmd_validate(model),
        Command::Evaluate {
            model,
            sequence,
            params,
        } => cmd_evaluate(model, sequence.as_deref(), params),
        Command::Optimize { model, out, params } => cmd_optimize(model, out, params),
        Command::Compare {
            baseline,
            power_aware,
            out,
        } => cmd_compare(baseline, power_aware, out.as_deref()),
        Command::Attribute {
            model,
            front,
            out,
            params,
        } => cmd_attribute(model, front, out, params),
        Command::ActionsReport { fronts, out } => cmd_actions_report(fronts, out.as_deref()),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn objective_lists() {
        assert_eq!(parse_objectives("baseline").unwrap(), ObjectiveSet::BASELINE);
        assert_eq!(
            parse_objectives("power,response_time,cost,complexity").unwrap(),
            ObjectiveSet::POWER_AWARE
        );
        assert!(parse_objectives("power,speed").is_err());
    }

    #[test]
    fn named_front() {
        assert_eq!(
            parse_named("pa=x.jsonl").unwrap(),
            ("pa".into(), PathBuf::from("x.jsonl"))
        );
        assert!(parse_named("x.jsonl").is_err());
    }

    #[test]
    fn flags_override_config() {
        let p = ParamArgs {
            seed: Some(7),
            runs: Some(2),
            k: Some(0.5),
            objectives: Some(ObjectiveSet::BASELINE),
            ..Default::default()
        };
        let c = p.resolve().unwrap();
        assert_eq!((c.experiment.seed, c.experiment.runs, c.k.k()), (7, 2, 0.5));
        assert_eq!(c.experiment.objectives, ObjectiveSet::BASELINE);
        assert_eq!(p.clone().resolve().unwrap().experiment.population_size, 16);
        let bad = ParamArgs {
            k: Some(1.5),
            ..Default::default()
        };
        assert_eq!(bad.resolve().unwrap_err().exit_code(), 1);
    }
}
