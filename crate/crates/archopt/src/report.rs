//! CSV reports: objective comparison, per-request attribution, attribution
//! summary and refactoring-action frequencies.

use archopt_core::attribution::{attribute, AttributionError};
use archopt_core::nsga2::Solution;
use archopt_core::objectives::Problem;
use archopt_core::stats::{mean, median, psp, samples_of, std_dev, FrequencyReport, PspReport, StatsError};
use archopt_core::{ObjectiveVector, RefactorError, RefactoringSequence};
use serde::Serialize;

use crate::front::FrontRow;

pub const INITIAL_ID: &str = "initial";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("solution {id}: {source}")]
    Refactor { id: String, source: RefactorError },
    #[error("solution {id}: {source}")]
    Attribution { id: String, source: AttributionError },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("no feasible solution in {0}")]
    NoFeasible(&'static str),
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn feasible(rows: &[FrontRow]) -> Vec<ObjectiveVector> {
    rows.iter()
        .map(|r| r.objectives)
        .filter(|o| o.response_time.is_finite())
        .collect()
}

/// Compares two sets of solutions objective by objective. Solutions with an
/// infinite response time are left out.
pub fn compare(baseline: &[FrontRow], power_aware: &[FrontRow]) -> Result<PspReport, ReportError> {
    let b = feasible(baseline);
    let p = feasible(power_aware);
    if b.is_empty() {
        return Err(ReportError::NoFeasible("the baseline front"));
    }
    if p.is_empty() {
        return Err(ReportError::NoFeasible("the power-aware front"));
    }
    Ok(psp(&samples_of(&b), &samples_of(&p))?)
}

#[derive(Serialize)]
struct PspCsvRow {
    objective: &'static str,
    mean_difference: String,
    hl: String,
    mwu_p_value: String,
    cliffs_delta: String,
    psp_hl: String,
    psp_delta: String,
    magnitude: &'static str,
}

pub fn psp_csv(report: &PspReport) -> String {
    csv_string(report.rows.iter().map(|r| PspCsvRow {
        objective: r.objective.name(),
        mean_difference: fixed(r.mean_difference),
        hl: fixed(r.hl),
        mwu_p_value: fixed(r.mwu_p),
        cliffs_delta: fixed(r.cliffs_delta),
        psp_hl: fixed(r.psp.0),
        psp_delta: fixed(r.psp.1),
        magnitude: r.magnitude.name(),
    }))
}

/// Power and cost of one request type in one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionLine {
    pub solution_id: String,
    pub scenario: String,
    pub power: f64,
    pub cost: f64,
    pub share_power: f64,
    pub share_cost: f64,
}

fn attribute_one(problem: &Problem, id: &str, seq: &RefactoringSequence) -> Result<Vec<AttributionLine>, ReportError> {
    let e = problem
        .evaluate(seq)
        .map_err(|source| ReportError::Refactor { id: id.into(), source })?;
    let rep = attribute(&e.architecture, &e.result, problem.power)
        .map_err(|source| ReportError::Attribution { id: id.into(), source })?;
    Ok(rep
        .rows()
        .into_iter()
        .map(|r| AttributionLine {
            solution_id: id.into(),
            scenario: r.scenario,
            power: r.power,
            cost: r.cost,
            share_power: r.share_power,
            share_cost: r.share_cost,
        })
        .collect())
}

/// Attribution of the initial architecture (id `initial`) followed by every
/// feasible solution of `rows`.
pub fn attribute_front(problem: &Problem, rows: &[FrontRow]) -> Result<Vec<AttributionLine>, ReportError> {
    let mut out = attribute_one(problem, INITIAL_ID, &RefactoringSequence::empty())?;
    for r in rows.iter().filter(|r| r.objectives.response_time.is_finite()) {
        out.extend(attribute_one(problem, &r.solution_id, &r.genotype)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct AttributionCsvRow<'a> {
    solution_id: &'a str,
    scenario_id: &'a str,
    power_w: String,
    cost_usd_h: String,
    share_power: String,
    share_cost: String,
}

pub fn attribution_csv(lines: &[AttributionLine]) -> String {
    csv_string(lines.iter().map(|l| AttributionCsvRow {
        solution_id: &l.solution_id,
        scenario_id: &l.scenario,
        power_w: fixed(l.power),
        cost_usd_h: fixed(l.cost),
        share_power: fixed(l.share_power),
        share_cost: fixed(l.share_cost),
    }))
}

/// Per-request power or cost: the initial value and statistics over the
/// solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: &'static str,
    pub scenario: String,
    pub initial: f64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

type Metric = (&'static str, fn(&AttributionLine) -> f64);

pub fn summarize(lines: &[AttributionLine]) -> Vec<SummaryRow> {
    let mut scenarios: Vec<&str> = Vec::new();
    for l in lines {
        if !scenarios.contains(&l.scenario.as_str()) {
            scenarios.push(&l.scenario);
        }
    }
    let mut out = Vec::new();
    let metrics: [Metric; 2] = [("power_w", |l| l.power), ("cost_usd_h", |l| l.cost)];
    for (metric, pick) in metrics {
        for &s in &scenarios {
            let of_s = lines.iter().filter(|l| l.scenario == s);
            let initial = of_s
                .clone()
                .find(|l| l.solution_id == INITIAL_ID)
                .map_or(f64::NAN, pick);
            let mut values: Vec<f64> = of_s.filter(|l| l.solution_id != INITIAL_ID).map(pick).collect();
            let (m, sd, md) = if values.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                (mean(&values), std_dev(&values), median(&mut values))
            };
            out.push(SummaryRow {
                metric,
                scenario: s.into(),
                initial,
                mean: m,
                std: sd,
                median: md,
            });
        }
    }
    out
}

#[derive(Serialize)]
struct SummaryCsvRow<'a> {
    metric: &'a str,
    scenario: &'a str,
    initial: String,
    mean: String,
    std: String,
    median: String,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    csv_string(rows.iter().map(|r| SummaryCsvRow {
        metric: r.metric,
        scenario: &r.scenario,
        initial: fixed(r.initial),
        mean: fixed(r.mean),
        std: fixed(r.std),
        median: fixed(r.median),
    }))
}

#[derive(Serialize)]
struct ActionCsvRow<'a> {
    experiment: &'a str,
    kind: &'static str,
    target: &'a str,
    target_kind: char,
    destination: &'a str,
    destination_kind: &'static str,
    count: usize,
    percentage: String,
}

/// One block of rows per `(experiment name, frequency report)` pair.
pub fn actions_csv(reports: &[(&str, &FrequencyReport)]) -> String {
    csv_string(reports.iter().flat_map(|&(name, rep)| {
        rep.rows.iter().map(move |r| ActionCsvRow {
            experiment: name,
            kind: r.kind.name(),
            target: &r.target,
            target_kind: r.kind.target_kind().letter(),
            destination: r.destination.as_deref().unwrap_or(""),
            destination_kind: if r.destination.is_some() { "C" } else { "" },
            count: r.count,
            percentage: fixed(r.percentage),
        })
    }))
}

/// Number of solutions in `rows` that contain at least one action.
pub fn refactored_count<T: Solution>(rows: &[T]) -> usize {
    rows.iter().filter(|r| !r.genotype().is_empty()).count()
}
