//! Analytical performance evaluation.
//!
//! Every node is an M/M/1 processor shared by an open multiclass workload.
//! Each scenario step becomes one entry per placement of its operation (one
//! placement unless the owning component has been cloned). For an entry `e`
//! on processor `p`:
//!
//! ```text
//! U_{e,p} = share * rate * demand / (1000 * speed(p))
//! U_p     = sum of U_{e,p} over the entries on p
//! W_e     = (demand / speed(p)) / (1 - U_p)
//! ```
//!
//! A scenario's response time is the share-weighted residence time of its
//! steps plus the expected link latency between consecutive steps. The system
//! response time is the arrival-rate weighted mean over scenarios. If any
//! processor reaches `1 - SATURATION_EPS` the result is infeasible and every
//! response time is `f64::INFINITY`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::model::Architecture;

/// Utilization margin below 1 that a processor must respect.
pub const SATURATION_EPS: f64 = 1e-6;

/// One scenario step bound to the processor that serves it.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub scenario: String,
    pub step_index: usize,
    pub operation: String,
    /// Component executing the step (the owner or one of its replicas).
    pub component: String,
    pub processor: String,
    /// Fraction of the step's invocations routed here.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryLoad {
    pub entry: Entry,
    pub utilization: f64,
    /// Residence time in ms; infinite when the result is infeasible.
    pub residence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    /// Utilization of every node, including empty ones (0).
    pub node_utilization: BTreeMap<String, f64>,
    pub entries: Vec<EntryLoad>,
    /// Milliseconds per scenario id.
    pub scenario_response: BTreeMap<String, f64>,
    pub system_response: f64,
    pub feasible: bool,
}

impl SolverResult {
    pub fn utilization(&self, node: &str) -> f64 {
        self.node_utilization.get(node).copied().unwrap_or(0.0)
    }

    pub fn entries_on<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a EntryLoad> + 'a {
        self.entries.iter().filter(move |e| e.entry.processor == node)
    }

    pub fn entries_of<'a>(&'a self, scenario: &'a str) -> impl Iterator<Item = &'a EntryLoad> + 'a {
        self.entries.iter().filter(move |e| e.entry.scenario == scenario)
    }
}

/// Builds the entry set: one entry per scenario step and placement.
pub fn build_queueing_model(arch: &Architecture) -> Vec<Entry> {
    let mut out = Vec::new();
    for s in &arch.scenarios {
        for (i, op) in s.steps.iter().enumerate() {
            for (component, node, share) in arch.placements(op) {
                out.push(Entry {
                    scenario: s.id.clone(),
                    step_index: i,
                    operation: op.clone(),
                    component: component.to_string(),
                    processor: node.to_string(),
                    share,
                });
            }
        }
    }
    out
}

/// Solves a validated architecture.
pub fn solve(arch: &Architecture) -> SolverResult {
    let speed: BTreeMap<&str, f64> = arch
        .nodes
        .iter()
        .map(|n| {
            let s = arch.instance(&n.instance).map_or(1.0, |i| i.speed_factor);
            (n.id.as_str(), s)
        })
        .collect();
    let demand: BTreeMap<&str, f64> = arch.operations.iter().map(|o| (o.id.as_str(), o.demand)).collect();
    let rate: BTreeMap<&str, f64> = arch.scenarios.iter().map(|s| (s.id.as_str(), s.arrival_rate)).collect();

    let entries = build_queueing_model(arch);
    let mut node_utilization: BTreeMap<String, f64> = arch.nodes.iter().map(|n| (n.id.clone(), 0.0)).collect();
    let mut loads: Vec<EntryLoad> = entries
        .into_iter()
        .map(|entry| {
            let sp = speed[entry.processor.as_str()];
            let u = entry.share * rate[entry.scenario.as_str()] * demand[entry.operation.as_str()] / (1000.0 * sp);
            *node_utilization.get_mut(&entry.processor).unwrap() += u;
            EntryLoad {
                entry,
                utilization: u,
                residence: 0.0,
            }
        })
        .collect();

    let feasible = node_utilization.values().all(|&u| u < 1.0 - SATURATION_EPS);

    if !feasible {
        for l in &mut loads {
            l.residence = f64::INFINITY;
        }
        return SolverResult {
            node_utilization,
            entries: loads,
            scenario_response: arch.scenarios.iter().map(|s| (s.id.clone(), f64::INFINITY)).collect(),
            system_response: f64::INFINITY,
            feasible,
        };
    }

    for l in &mut loads {
        let p = l.entry.processor.as_str();
        let service = demand[l.entry.operation.as_str()] / speed[p];
        l.residence = service / (1.0 - node_utilization[p]);
    }

    let latency = arch.latency_matrix();
    let pos: BTreeMap<&str, usize> = arch.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();

    let mut scenario_response = BTreeMap::new();
    let mut idx = 0;
    for s in &arch.scenarios {
        // Entries are grouped by (scenario, step) in build order.
        let mut steps: Vec<Vec<&EntryLoad>> = alloc::vec![Vec::new(); s.steps.len()];
        while idx < loads.len() && loads[idx].entry.scenario == s.id {
            steps[loads[idx].entry.step_index].push(&loads[idx]);
            idx += 1;
        }
        let mut total = 0.0;
        for step in &steps {
            total += step.iter().map(|l| l.entry.share * l.residence).sum::<f64>();
        }
        for pair in steps.windows(2) {
            for x in &pair[0] {
                for y in &pair[1] {
                    let (i, j) = (pos[x.entry.processor.as_str()], pos[y.entry.processor.as_str()]);
                    if i != j {
                        total += x.entry.share * y.entry.share * latency[i][j];
                    }
                }
            }
        }
        scenario_response.insert(s.id.clone(), total);
    }

    let total_rate: f64 = arch.scenarios.iter().map(|s| s.arrival_rate).sum();
    let system_response = if arch.scenarios.is_empty() {
        0.0
    } else if total_rate > 0.0 {
        arch.scenarios
            .iter()
            .map(|s| s.arrival_rate * scenario_response[&s.id])
            .sum::<f64>()
            / total_rate
    } else {
        scenario_response.values().sum::<f64>() / arch.scenarios.len() as f64
    };

    SolverResult {
        node_utilization,
        entries: loads,
        scenario_response,
        system_response,
        feasible,
    }
}
