//! Independent optimization runs and their output directory.
//!
//! ```text
//! out/
//!   run-00.jsonl ... run-30.jsonl   final rank-0 front of every run
//!   super-front.jsonl               non-dominated union of the run fronts
//!   manifest.json                   configuration, seeds, model hash, timing
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use archopt_core::nsga2::{evolve, super_front, EvolveError, RunOutcome};
use archopt_core::objectives::Problem;
use chrono::{DateTime, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::front::{write_front, FrontRow};

pub const THREADS_ENV: &str = "ARCHOPT_THREADS";
pub const SUPER_FRONT_FILE: &str = "super-front.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn run_file_name(run: usize) -> String {
    format!("run-{run:02}.jsonl")
}

pub fn solution_id(run: usize, index: usize) -> String {
    format!("r{run:02}-{index:02}")
}

/// Worker threads: `ARCHOPT_THREADS` if set to a positive integer, otherwise
/// the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

fn rows_of(run: usize, outcome: RunOutcome) -> Vec<FrontRow> {
    outcome
        .front
        .into_iter()
        .enumerate()
        .map(|(i, ind)| FrontRow {
            solution_id: solution_id(run, i),
            run,
            generations: outcome.generations,
            genotype: ind.genotype,
            objectives: ind.objectives,
        })
        .collect()
}

type RunResult = Result<Vec<FrontRow>, EvolveError>;

/// Runs `config.experiment.runs` seeded runs on up to `threads` threads.
/// The result only depends on the configuration, never on scheduling.
pub fn run_all(problem: &Problem, config: &Config, threads: usize) -> Result<Vec<Vec<FrontRow>>, EvolveError> {
    let exp = &config.experiment;
    exp.validate()?;
    let runs = exp.runs;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunResult>>> = Mutex::new(vec![None; runs]);
    thread::scope(|s| {
        for _ in 0..threads.clamp(1, runs.max(1)) {
            s.spawn(|| loop {
                let run = next.fetch_add(1, Ordering::Relaxed);
                if run >= runs {
                    break;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(exp.run_seed(run));
                let res = evolve(exp, problem, &mut rng).map(|o| rows_of(run, o));
                slots.lock().unwrap()[run] = Some(res);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every run finishes"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config: Config,
    pub master_seed: u64,
    pub run_seeds: Vec<u64>,
    pub model_sha256: String,
    pub threads: usize,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub run_files: Vec<String>,
    pub super_front_file: String,
    pub super_front_size: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub runs: Vec<Vec<FrontRow>>,
    pub super_front: Vec<FrontRow>,
    pub manifest: Manifest,
}

/// Runs the experiment. `model_text` is the model file as read, for the hash.
pub fn run_experiment(
    problem: &Problem,
    config: &Config,
    model_text: &str,
    threads: usize,
) -> Result<ExperimentOutput, EvolveError> {
    let started_at = Utc::now();
    let runs = run_all(problem, config, threads)?;
    let super_front = super_front(&runs, config.experiment.objectives);
    let exp = &config.experiment;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        master_seed: exp.seed,
        run_seeds: (0..exp.runs).map(|r| exp.run_seed(r)).collect(),
        model_sha256: sha256_hex(model_text.as_bytes()),
        threads,
        started_at,
        finished_at: Utc::now(),
        run_files: (0..exp.runs).map(run_file_name).collect(),
        super_front_file: SUPER_FRONT_FILE.into(),
        super_front_size: super_front.len(),
    };
    Ok(ExperimentOutput {
        runs,
        super_front,
        manifest,
    })
}

/// Writes every file of the experiment into `dir`, creating it if needed.
pub fn write_output(dir: &Path, out: &ExperimentOutput) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (run, rows) in out.runs.iter().enumerate() {
        let p = dir.join(run_file_name(run));
        write_front(&p, rows)?;
        written.push(p);
    }
    let p = dir.join(SUPER_FRONT_FILE);
    write_front(&p, &out.super_front)?;
    written.push(p);
    let p = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&out.manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&p, json)?;
    written.push(p);
    Ok(written)
}
