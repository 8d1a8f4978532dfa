//! The four objectives: power, response time, cost and complexity.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Architecture;
use crate::refactor::{apply_sequence, ActionContext, ActionKind, RefactorError, RefactoringSequence};
use crate::solver::{solve, SolverResult};

/// Idle power model parameter: an idle node draws `k * power_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PowerParams {
    k: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("idle scaling factor {0} outside [0, 1]")]
    IdleFactor(f64),
    #[error("complexity catalog has no entry for {0}")]
    MissingBase(ActionKind),
    #[error("invalid base complexity {1} for {0}")]
    InvalidBase(ActionKind, f64),
    #[error("unknown objective `{0}`")]
    UnknownObjective(String),
}

impl PowerParams {
    pub const DEFAULT_K: f64 = 0.3;

    pub fn new(k: f64) -> Result<Self, ParamError> {
        if (0.0..=1.0).contains(&k) {
            Ok(Self { k })
        } else {
            Err(ParamError::IdleFactor(k))
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl Default for PowerParams {
    fn default() -> Self {
        Self { k: Self::DEFAULT_K }
    }
}

impl TryFrom<f64> for PowerParams {
    type Error = ParamError;
    fn try_from(k: f64) -> Result<Self, ParamError> {
        Self::new(k)
    }
}

impl From<PowerParams> for f64 {
    fn from(p: PowerParams) -> f64 {
        p.k
    }
}

/// Base complexity per action kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<ActionKind, f64>", into = "BTreeMap<ActionKind, f64>")]
pub struct ComplexityCatalog {
    base: BTreeMap<ActionKind, f64>,
}

impl ComplexityCatalog {
    pub fn new(base: BTreeMap<ActionKind, f64>) -> Result<Self, ParamError> {
        for kind in ActionKind::ALL {
            match base.get(&kind) {
                None => return Err(ParamError::MissingBase(kind)),
                Some(&v) if !(v.is_finite() && v >= 0.0) => return Err(ParamError::InvalidBase(kind, v)),
                _ => {}
            }
        }
        Ok(Self { base })
    }

    pub fn base(&self, kind: ActionKind) -> f64 {
        self.base[&kind]
    }
}

impl Default for ComplexityCatalog {
    fn default() -> Self {
        Self {
            base: BTreeMap::from([
                (ActionKind::Move, 2.0),
                (ActionKind::Redo, 2.0),
                (ActionKind::Clon, 1.0),
                (ActionKind::Motn, 4.0),
                (ActionKind::Drop, 3.0),
            ]),
        }
    }
}

impl TryFrom<BTreeMap<ActionKind, f64>> for ComplexityCatalog {
    type Error = ParamError;
    fn try_from(base: BTreeMap<ActionKind, f64>) -> Result<Self, ParamError> {
        Self::new(base)
    }
}

impl From<ComplexityCatalog> for BTreeMap<ActionKind, f64> {
    fn from(c: ComplexityCatalog) -> Self {
        c.base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Power,
    ResponseTime,
    Cost,
    Complexity,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::Power,
        Objective::ResponseTime,
        Objective::Cost,
        Objective::Complexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Power => "power",
            Objective::ResponseTime => "response_time",
            Objective::Cost => "cost",
            Objective::Complexity => "complexity",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ParamError> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| ParamError::UnknownObjective(s.to_string()))
    }

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Objectives that take part in dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Objective>", into = "Vec<Objective>")]
pub struct ObjectiveSet(u8);

impl ObjectiveSet {
    /// Response time, cost and complexity.
    pub const BASELINE: ObjectiveSet = ObjectiveSet(0b1110);
    /// All four objectives.
    pub const POWER_AWARE: ObjectiveSet = ObjectiveSet(0b1111);

    pub fn contains(self, o: Objective) -> bool {
        self.0 & o.bit() != 0
    }

    pub fn with(self, o: Objective) -> Self {
        Self(self.0 | o.bit())
    }

    pub fn iter(self) -> impl Iterator<Item = Objective> {
        Objective::ALL.into_iter().filter(move |o| self.contains(*o))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl FromIterator<Objective> for ObjectiveSet {
    fn from_iter<I: IntoIterator<Item = Objective>>(iter: I) -> Self {
        iter.into_iter().fold(ObjectiveSet(0), ObjectiveSet::with)
    }
}

impl From<Vec<Objective>> for ObjectiveSet {
    fn from(v: Vec<Objective>) -> Self {
        v.into_iter().collect()
    }
}

impl From<ObjectiveSet> for Vec<Objective> {
    fn from(s: ObjectiveSet) -> Self {
        s.iter().collect()
    }
}

/// Power in W, response time in ms (infinite when saturated), cost in USD/h,
/// complexity dimensionless. All minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub power: f64,
    pub response_time: f64,
    pub cost: f64,
    pub complexity: f64,
}

impl ObjectiveVector {
    pub fn get(&self, o: Objective) -> f64 {
        match o {
            Objective::Power => self.power,
            Objective::ResponseTime => self.response_time,
            Objective::Cost => self.cost,
            Objective::Complexity => self.complexity,
        }
    }
}

/// Power of one node at utilization `u` (clamped to `[0, 1]`).
pub fn node_power(power_max: f64, u: f64, params: PowerParams) -> f64 {
    let u = u.clamp(0.0, 1.0);
    (1.0 - u) * params.k * power_max + u * power_max
}

/// Sum of node power over the nodes hosting at least one component.
pub fn eval_power(arch: &Architecture, result: &SolverResult, params: PowerParams) -> f64 {
    arch.used_nodes()
        .into_iter()
        .map(|n| {
            let pmax = arch.instance(&n.instance).map_or(0.0, |i| i.power_max);
            node_power(pmax, result.utilization(&n.id), params)
        })
        .sum()
}

/// Hourly cost of the nodes hosting at least one component.
pub fn eval_cost(arch: &Architecture) -> f64 {
    arch.used_nodes()
        .into_iter()
        .map(|n| arch.instance(&n.instance).map_or(0.0, |i| i.cost))
        .sum()
}

/// `sum over actions of C_base(kind) * C_arch`.
pub fn eval_complexity(trace: &[ActionContext], catalog: &ComplexityCatalog) -> f64 {
    trace.iter().map(|c| catalog.base(c.kind) * c.arch_factor()).sum()
}

/// A refactored architecture with its solver output and objective values.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub architecture: Architecture,
    pub result: SolverResult,
    pub objectives: ObjectiveVector,
    /// Objectives taking part in dominance; the others are informative only.
    pub active: ObjectiveSet,
}

/// Everything needed to turn a refactoring sequence into objective values.
#[derive(Debug, Clone)]
pub struct Problem {
    pub initial: Architecture,
    pub power: PowerParams,
    pub complexity: ComplexityCatalog,
    pub objectives: ObjectiveSet,
}

impl Problem {
    pub fn new(initial: Architecture, objectives: ObjectiveSet) -> Self {
        Self {
            initial,
            power: PowerParams::default(),
            complexity: ComplexityCatalog::default(),
            objectives,
        }
    }

    pub fn evaluate(&self, seq: &RefactoringSequence) -> Result<Evaluation, RefactorError> {
        evaluate(&self.initial, seq, self.power, &self.complexity, self.objectives)
    }
}

/// Applies `seq` to `arch0`, solves, and computes all four objectives.
/// Power is always computed, even when it does not take part in dominance.
pub fn evaluate(
    arch0: &Architecture,
    seq: &RefactoringSequence,
    params: PowerParams,
    catalog: &ComplexityCatalog,
    active: ObjectiveSet,
) -> Result<Evaluation, RefactorError> {
    let applied = apply_sequence(seq, arch0)?;
    let result = solve(&applied.architecture);
    let objectives = ObjectiveVector {
        power: eval_power(&applied.architecture, &result, params),
        response_time: result.system_response,
        cost: eval_cost(&applied.architecture),
        complexity: eval_complexity(&applied.trace, catalog),
    };
    Ok(Evaluation {
        architecture: applied.architecture,
        result,
        objectives,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::small;
    use crate::model::{default_catalog, Component, Node, Operation, Scenario};
    use crate::refactor::RefactoringAction;
    use alloc::vec;

    fn d2() -> f64 {
        default_catalog()[0].power_max
    }

    #[test]
    fn power_endpoints() {
        let k = PowerParams::new(0.3).unwrap();
        assert_eq!(node_power(d2(), 1.0, k), 83.4);
        assert!((node_power(d2(), 0.0, k) - 25.02).abs() < 1e-12);
        assert!((node_power(d2(), 0.5, k) - 54.21).abs() < 1e-12);
    }

    #[test]
    fn k_one_ignores_utilization() {
        let k = PowerParams::new(1.0).unwrap();
        for u in [0.0, 0.3, 0.9] {
            assert!((node_power(10.0, u, k) - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_k() {
        assert!(PowerParams::new(1.5).is_err());
        assert!(PowerParams::new(-0.1).is_err());
    }

    #[test]
    fn cost_of_micro_and_medium() {
        let mut arch = small();
        arch.nodes[0].instance = "t2.micro".into();
        arch.nodes[1].instance = "t2.medium".into();
        assert!((eval_cost(&arch) - 0.034).abs() < 1e-15);
        arch.nodes.truncate(1);
        arch.nodes[0].instance = "m5ad.xlarge".into();
        arch.deployment.values_mut().for_each(|n| *n = "n1".into());
        assert_eq!(eval_cost(&arch), 0.25);
    }

    #[test]
    fn empty_nodes_excluded() {
        let mut arch = small();
        let before = eval_cost(&arch);
        arch.nodes.push(Node {
            id: "spare".into(),
            instance: "d2.2xlarge".into(),
        });
        assert_eq!(eval_cost(&arch), before);
        let r = solve(&arch);
        let mut no_spare = arch.clone();
        no_spare.nodes.pop();
        assert_eq!(
            eval_power(&arch, &r, PowerParams::default()),
            eval_power(&no_spare, &solve(&no_spare), PowerParams::default())
        );
    }

    #[test]
    fn complexity_of_one_action() {
        let catalog = ComplexityCatalog::default();
        let ctx = ActionContext {
            kind: ActionKind::Redo,
            degree: 3,
            max_degree: 3,
        };
        assert_eq!(eval_complexity(&[], &catalog), 0.0);
        assert_eq!(eval_complexity(&[ctx], &catalog), 4.0);
        assert_eq!(eval_complexity(&[ctx, ctx], &catalog), 8.0);
    }

    #[test]
    fn catalog_requires_every_kind() {
        let mut base: BTreeMap<ActionKind, f64> = ComplexityCatalog::default().into();
        base.remove(&ActionKind::Clon);
        assert_eq!(
            ComplexityCatalog::new(base),
            Err(ParamError::MissingBase(ActionKind::Clon))
        );
    }

    #[test]
    fn objective_sets() {
        assert_eq!(ObjectiveSet::BASELINE.len(), 3);
        assert!(!ObjectiveSet::BASELINE.contains(Objective::Power));
        assert_eq!(ObjectiveSet::BASELINE.with(Objective::Power), ObjectiveSet::POWER_AWARE);
        let v: Vec<Objective> = ObjectiveSet::BASELINE.into();
        assert_eq!(v, vec![Objective::ResponseTime, Objective::Cost, Objective::Complexity]);
    }

    #[test]
    fn identity_sequence_gives_initial_objectives() {
        let arch = small();
        let e = evaluate(
            &arch,
            &RefactoringSequence::empty(),
            PowerParams::default(),
            &ComplexityCatalog::default(),
            ObjectiveSet::BASELINE,
        )
        .unwrap();
        let r = solve(&arch);
        assert_eq!(e.objectives.response_time, r.system_response);
        assert_eq!(e.objectives.complexity, 0.0);
        assert!(e.objectives.power > 0.0);
        assert!(!e.active.contains(Objective::Power));
    }

    #[test]
    fn dropping_idle_node_saves_its_cost() {
        let mut arch = small();
        arch.nodes.push(Node {
            id: "idle".into(),
            instance: "t2.medium".into(),
        });
        arch.links.push(crate::model::Link {
            a: "idle".into(),
            b: "n1".into(),
            latency: 1.0,
        });
        arch.components.push(Component::new("admin"));
        arch.operations.push(Operation {
            id: "admin1".into(),
            owner: "admin".into(),
            demand: 3.0,
        });
        arch.deployment.insert("admin".into(), "idle".into());
        arch.scenarios.push(Scenario {
            id: "rare".into(),
            arrival_rate: 0.0,
            steps: vec!["admin1".into()],
        });
        let problem = Problem::new(arch, ObjectiveSet::POWER_AWARE);
        let base = problem.evaluate(&RefactoringSequence::empty()).unwrap();
        let seq = RefactoringSequence::new(vec![RefactoringAction::drop_node("idle")]).unwrap();
        let dropped = problem.evaluate(&seq).unwrap();
        assert!((base.objectives.cost - dropped.objectives.cost - 0.03).abs() < 1e-12);
    }
}
