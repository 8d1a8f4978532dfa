//! Attribution of node power and cost to request types.
//!
//! An entry draws its busy share `U_{e,p} * power_max(p)` plus a share of the
//! processor's idle power proportional to `U_{e,p} / U_p`. Cost is split by
//! the same proportion. Processors with `U_p = 0` attribute nothing; their
//! power and cost are reported as unattributed.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::model::{Architecture, ModelError};
use crate::objectives::{node_power, PowerParams};
use crate::solver::{EntryLoad, SolverResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttributionError {
    #[error("cannot attribute an infeasible deployment")]
    Infeasible,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn shares(arch: &Architecture, load: &EntryLoad, result: &SolverResult) -> Option<(f64, f64, f64)> {
    let up = result.utilization(&load.entry.processor);
    let inst = arch.node_instance(&load.entry.processor)?;
    Some((up, inst.power_max, inst.cost))
}

/// Power drawn on behalf of one entry.
pub fn entry_power(arch: &Architecture, load: &EntryLoad, result: &SolverResult, params: PowerParams) -> f64 {
    let Some((up, pmax, _)) = shares(arch, load, result) else {
        return 0.0;
    };
    if up <= 0.0 {
        return 0.0;
    }
    let ue = load.utilization;
    ue * pmax + (1.0 - up) * params.k() * pmax * ue / up
}

/// Hourly cost attributed to one entry.
pub fn entry_cost(arch: &Architecture, load: &EntryLoad, result: &SolverResult) -> f64 {
    let Some((up, _, cost)) = shares(arch, load, result) else {
        return 0.0;
    };
    if up <= 0.0 {
        return 0.0;
    }
    cost * load.utilization / up
}

pub fn request_power(
    arch: &Architecture,
    scenario: &str,
    result: &SolverResult,
    params: PowerParams,
) -> Result<f64, ModelError> {
    arch.scenario(scenario)
        .ok_or_else(|| ModelError::UnknownScenario(scenario.to_string()))?;
    Ok(result
        .entries_of(scenario)
        .map(|e| entry_power(arch, e, result, params))
        .sum())
}

pub fn request_cost(arch: &Architecture, scenario: &str, result: &SolverResult) -> Result<f64, ModelError> {
    arch.scenario(scenario)
        .ok_or_else(|| ModelError::UnknownScenario(scenario.to_string()))?;
    Ok(result.entries_of(scenario).map(|e| entry_cost(arch, e, result)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionReport {
    pub per_scenario_power: BTreeMap<String, f64>,
    pub per_scenario_cost: BTreeMap<String, f64>,
    /// Power of the nodes with positive utilization.
    pub total_power: f64,
    /// Cost of the nodes with positive utilization.
    pub total_cost: f64,
    /// Power of used nodes that carry no load.
    pub unattributed_power: f64,
    /// Cost of used nodes that carry no load.
    pub unattributed_cost: f64,
}

/// One row of the per-solution breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareRow {
    pub scenario: String,
    pub power: f64,
    pub cost: f64,
    pub share_power: f64,
    pub share_cost: f64,
}

impl AttributionReport {
    /// Per-scenario rows with each scenario's fraction of the attributed totals.
    pub fn rows(&self) -> Vec<ShareRow> {
        let frac = |x: f64, total: f64| if total > 0.0 { x / total } else { 0.0 };
        self.per_scenario_power
            .iter()
            .map(|(s, &p)| {
                let c = self.per_scenario_cost[s];
                ShareRow {
                    scenario: s.clone(),
                    power: p,
                    cost: c,
                    share_power: frac(p, self.total_power),
                    share_cost: frac(c, self.total_cost),
                }
            })
            .collect()
    }
}

pub fn attribute(
    arch: &Architecture,
    result: &SolverResult,
    params: PowerParams,
) -> Result<AttributionReport, AttributionError> {
    if !result.feasible {
        return Err(AttributionError::Infeasible);
    }
    let mut per_scenario_power = BTreeMap::new();
    let mut per_scenario_cost = BTreeMap::new();
    for s in &arch.scenarios {
        per_scenario_power.insert(s.id.clone(), request_power(arch, &s.id, result, params)?);
        per_scenario_cost.insert(s.id.clone(), request_cost(arch, &s.id, result)?);
    }
    let (mut total_power, mut total_cost) = (0.0, 0.0);
    let (mut unattributed_power, mut unattributed_cost) = (0.0, 0.0);
    for node in arch.used_nodes() {
        let Some(inst) = arch.instance(&node.instance) else {
            continue;
        };
        let u = result.utilization(&node.id);
        let p = node_power(inst.power_max, u, params);
        if u > 0.0 {
            total_power += p;
            total_cost += inst.cost;
        } else {
            unattributed_power += p;
            unattributed_cost += inst.cost;
        }
    }
    Ok(AttributionReport {
        per_scenario_power,
        per_scenario_cost,
        total_power,
        total_cost,
        unattributed_power,
        unattributed_cost,
    })
}
