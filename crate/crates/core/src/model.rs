//! Architecture description: cloud instance catalog, nodes, components,
//! operations, links, deployment and scenarios.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// A cloud instance type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceType {
    pub name: String,
    /// CPU speed multiplier; operation demands are divided by it.
    pub speed_factor: f64,
    /// Watts drawn when fully utilized.
    pub power_max: f64,
    /// USD per hour.
    pub cost: f64,
}

impl InstanceType {
    pub fn new(name: &str, speed_factor: f64, power_max: f64, cost: f64) -> Self {
        Self {
            name: name.to_string(),
            speed_factor,
            power_max,
            cost,
        }
    }
}

/// The five EC2 instance types used as the default catalog.
pub fn default_catalog() -> Vec<InstanceType> {
    alloc::vec![
        InstanceType::new("d2.2xlarge", 4.67, 83.4, 0.46),
        InstanceType::new("m6i.xlarge", 3.48, 32.4, 0.13),
        InstanceType::new("t2.medium", 2.33, 14.1, 0.03),
        InstanceType::new("t2.micro", 1.17, 6.40, 0.004),
        InstanceType::new("m5ad.xlarge", 1.14, 29.9, 0.25),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    /// Name of an [`InstanceType`] in the catalog.
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    /// Set on replicas created by node cloning. A replica owns no operations;
    /// it serves an even share of the traffic addressed to its original.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replica_of: Option<String>,
}

impl Component {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            replica_of: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub id: String,
    pub owner: String,
    /// Milliseconds of CPU per invocation at speed factor 1.0.
    pub demand: f64,
}

/// Undirected network link between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: String,
    pub b: String,
    /// Milliseconds added to every message crossing the link.
    #[serde(default)]
    pub latency: f64,
}

impl Link {
    pub fn touches(&self, node: &str) -> bool {
        self.a == node || self.b == node
    }

    pub fn other(&self, node: &str) -> Option<&str> {
        if self.a == node {
            Some(&self.b)
        } else if self.b == node {
            Some(&self.a)
        } else {
            None
        }
    }

    fn connects(&self, x: &str, y: &str) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

/// A request type: an open workload walking an ordered list of operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// Requests per second.
    pub arrival_rate: f64,
    /// Operation ids, in call order.
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub catalog: Vec<InstanceType>,
    pub nodes: Vec<Node>,
    pub components: Vec<Component>,
    pub operations: Vec<Operation>,
    #[serde(default)]
    pub links: Vec<Link>,
    /// Component id to node id.
    pub deployment: BTreeMap<String, String>,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("unknown instance type `{0}`")]
    UnknownInstance(String),
}

/// Broken invariant kinds reported by [`Architecture::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    DuplicateInstanceName,
    InvalidInstanceAttribute,
    NoNodes,
    DuplicateNodeId,
    UnknownInstanceType,
    DuplicateComponentId,
    InvalidReplica,
    ReplicaOwnsOperation,
    DuplicateOperationId,
    UnknownOwner,
    InvalidDemand,
    SelfLink,
    DanglingLinkEndpoint,
    DuplicateLink,
    InvalidLatency,
    UndeployedComponent,
    DeploymentUnknownComponent,
    DeploymentUnknownNode,
    DuplicateScenarioId,
    InvalidArrivalRate,
    EmptyScenario,
    DanglingOperationReference,
    DisconnectedNode,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::DuplicateInstanceName => "duplicate instance name",
            Rule::InvalidInstanceAttribute => "invalid instance attribute",
            Rule::NoNodes => "no nodes",
            Rule::DuplicateNodeId => "duplicate node id",
            Rule::UnknownInstanceType => "unknown instance type",
            Rule::DuplicateComponentId => "duplicate component id",
            Rule::InvalidReplica => "invalid replica reference",
            Rule::ReplicaOwnsOperation => "replica owns operation",
            Rule::DuplicateOperationId => "duplicate operation id",
            Rule::UnknownOwner => "unknown operation owner",
            Rule::InvalidDemand => "invalid demand",
            Rule::SelfLink => "self link",
            Rule::DanglingLinkEndpoint => "dangling link endpoint",
            Rule::DuplicateLink => "duplicate link",
            Rule::InvalidLatency => "invalid latency",
            Rule::UndeployedComponent => "undeployed component",
            Rule::DeploymentUnknownComponent => "deployment of unknown component",
            Rule::DeploymentUnknownNode => "deployment to unknown node",
            Rule::DuplicateScenarioId => "duplicate scenario id",
            Rule::InvalidArrivalRate => "invalid arrival rate",
            Rule::EmptyScenario => "empty scenario",
            Rule::DanglingOperationReference => "dangling operation reference",
            Rule::DisconnectedNode => "disconnected node",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One broken invariant, tied to the offending element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub rule: Rule,
    pub element: String,
}

impl Violation {
    fn new(rule: Rule, element: &str) -> Self {
        Self {
            rule,
            element: element.to_string(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: `{}`", self.rule, self.element)
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

impl Architecture {
    pub fn instance(&self, name: &str) -> Option<&InstanceType> {
        self.catalog.iter().find(|i| i.name == name)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn operation(&self, id: &str) -> Option<&Operation> {
        self.operations.iter().find(|o| o.id == id)
    }

    pub fn scenario(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    /// Instance type of a node.
    pub fn node_instance(&self, node: &str) -> Option<&InstanceType> {
        self.node(node).and_then(|n| self.instance(&n.instance))
    }

    /// The component that owns operations on behalf of `component`: itself,
    /// or its original when it is a replica.
    pub fn root_of<'a>(&'a self, component: &'a str) -> &'a str {
        match self.component(component).and_then(|c| c.replica_of.as_deref()) {
            Some(root) => root,
            None => component,
        }
    }

    /// The original component followed by its replicas, in declaration order.
    pub fn replica_group<'a>(&'a self, root: &'a str) -> Vec<&'a str> {
        let mut group = alloc::vec![root];
        group.extend(
            self.components
                .iter()
                .filter(|c| c.replica_of.as_deref() == Some(root))
                .map(|c| c.id.as_str()),
        );
        group
    }

    /// Where invocations of an operation execute: one `(component, node, share)`
    /// per member of its owner's replica group; shares sum to 1.
    pub fn placements(&self, operation: &str) -> Vec<(&str, &str, f64)> {
        let Some(op) = self.operation(operation) else {
            return Vec::new();
        };
        let group = self.replica_group(&op.owner);
        let share = 1.0 / group.len() as f64;
        group
            .into_iter()
            .filter_map(|c| self.deployment.get(c).map(|n| (c, n.as_str(), share)))
            .collect()
    }

    /// Components deployed on a node, sorted by id.
    pub fn components_on(&self, node: &str) -> Vec<&str> {
        self.deployment
            .iter()
            .filter(|(_, n)| n.as_str() == node)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// Nodes hosting at least one component, in declaration order.
    pub fn used_nodes(&self) -> Vec<&Node> {
        let used: BTreeSet<&str> = self.deployment.values().map(String::as_str).collect();
        self.nodes.iter().filter(|n| used.contains(n.id.as_str())).collect()
    }

    /// Directly linked nodes, sorted by id.
    pub fn neighbors(&self, node: &str) -> Vec<&str> {
        let set: BTreeSet<&str> = self.links.iter().filter_map(|l| l.other(node)).collect();
        set.into_iter().collect()
    }

    pub fn link_between(&self, x: &str, y: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.connects(x, y))
    }

    /// Largest latency over all links, 0 without links. Used for links created
    /// by refactorings that have no original connection to copy.
    pub fn max_link_latency(&self) -> f64 {
        self.links.iter().map(|l| l.latency).fold(0.0, f64::max)
    }

    /// All-pairs shortest-path latency over links (Floyd-Warshall), indexed by
    /// node position in `self.nodes`. Unreachable pairs are `f64::INFINITY`.
    pub fn latency_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let pos: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| (node.id.as_str(), i))
            .collect();
        let mut d = alloc::vec![alloc::vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for l in &self.links {
            if let (Some(&i), Some(&j)) = (pos.get(l.a.as_str()), pos.get(l.b.as_str())) {
                if i != j && l.latency < d[i][j] {
                    d[i][j] = l.latency;
                    d[j][i] = l.latency;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                if d[i][k].is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    /// Checks every invariant and returns all violations, sorted.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut names = BTreeSet::new();
        for inst in &self.catalog {
            if !names.insert(inst.name.as_str()) {
                out.push(Violation::new(Rule::DuplicateInstanceName, &inst.name));
            }
            if !(inst.speed_factor.is_finite() && inst.speed_factor > 0.0)
                || !finite_nonneg(inst.power_max)
                || !finite_nonneg(inst.cost)
            {
                out.push(Violation::new(Rule::InvalidInstanceAttribute, &inst.name));
            }
        }

        if self.nodes.is_empty() {
            out.push(Violation::new(Rule::NoNodes, ""));
        }
        let mut node_ids = BTreeSet::new();
        for node in &self.nodes {
            if !node_ids.insert(node.id.as_str()) {
                out.push(Violation::new(Rule::DuplicateNodeId, &node.id));
            }
            if !names.contains(node.instance.as_str()) {
                out.push(Violation::new(Rule::UnknownInstanceType, &node.id));
            }
        }

        let mut comp_ids = BTreeSet::new();
        for c in &self.components {
            if !comp_ids.insert(c.id.as_str()) {
                out.push(Violation::new(Rule::DuplicateComponentId, &c.id));
            }
        }
        for c in &self.components {
            if let Some(root) = &c.replica_of {
                let ok = root != &c.id && self.component(root).is_some_and(|r| r.replica_of.is_none());
                if !ok {
                    out.push(Violation::new(Rule::InvalidReplica, &c.id));
                }
            }
        }

        let mut op_ids = BTreeSet::new();
        for op in &self.operations {
            if !op_ids.insert(op.id.as_str()) {
                out.push(Violation::new(Rule::DuplicateOperationId, &op.id));
            }
            match self.component(&op.owner) {
                None => out.push(Violation::new(Rule::UnknownOwner, &op.id)),
                Some(c) if c.replica_of.is_some() => out.push(Violation::new(Rule::ReplicaOwnsOperation, &op.id)),
                Some(_) => {}
            }
            if !finite_nonneg(op.demand) {
                out.push(Violation::new(Rule::InvalidDemand, &op.id));
            }
        }

        let mut seen_links: BTreeSet<(&str, &str)> = BTreeSet::new();
        for l in &self.links {
            let key = if l.a <= l.b {
                (l.a.as_str(), l.b.as_str())
            } else {
                (l.b.as_str(), l.a.as_str())
            };
            let label = || {
                let mut s = String::new();
                s.push_str(key.0);
                s.push_str("--");
                s.push_str(key.1);
                s
            };
            if l.a == l.b {
                out.push(Violation::new(Rule::SelfLink, &l.a));
            } else if !seen_links.insert(key) {
                out.push(Violation::new(Rule::DuplicateLink, &label()));
            }
            for end in [&l.a, &l.b] {
                if !node_ids.contains(end.as_str()) {
                    out.push(Violation::new(Rule::DanglingLinkEndpoint, end));
                }
            }
            if !finite_nonneg(l.latency) {
                out.push(Violation::new(Rule::InvalidLatency, &label()));
            }
        }

        for c in &self.components {
            if !self.deployment.contains_key(&c.id) {
                out.push(Violation::new(Rule::UndeployedComponent, &c.id));
            }
        }
        for (c, n) in &self.deployment {
            if !comp_ids.contains(c.as_str()) {
                out.push(Violation::new(Rule::DeploymentUnknownComponent, c));
            }
            if !node_ids.contains(n.as_str()) {
                out.push(Violation::new(Rule::DeploymentUnknownNode, c));
            }
        }

        let mut scenario_ids = BTreeSet::new();
        for s in &self.scenarios {
            if !scenario_ids.insert(s.id.as_str()) {
                out.push(Violation::new(Rule::DuplicateScenarioId, &s.id));
            }
            if !finite_nonneg(s.arrival_rate) {
                out.push(Violation::new(Rule::InvalidArrivalRate, &s.id));
            }
            if s.steps.is_empty() {
                out.push(Violation::new(Rule::EmptyScenario, &s.id));
            }
            for step in &s.steps {
                if !op_ids.contains(step.as_str()) {
                    out.push(Violation::new(Rule::DanglingOperationReference, step));
                }
            }
        }

        // Connectivity over the unique node ids.
        if let Some(start) = node_ids.iter().next().copied() {
            let mut reached = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                for l in &self.links {
                    if let Some(m) = l.other(n) {
                        if node_ids.contains(m) && reached.insert(m) {
                            queue.push_back(m);
                        }
                    }
                }
            }
            for id in &node_ids {
                if !reached.contains(id) {
                    out.push(Violation::new(Rule::DisconnectedNode, id));
                }
            }
        }

        out.sort();
        out.dedup();
        out
    }

    /// Rate-weighted message counts between `component` and every other node.
    ///
    /// Each pair of consecutive scenario steps where one side runs on
    /// `component` and the other on a component hosted elsewhere contributes
    /// `arrival_rate * share_self * share_other` to that other node. Shares
    /// are 1 unless replicas split the traffic.
    pub fn component_affinity(&self, component: &str) -> Result<BTreeMap<String, f64>, ModelError> {
        let comp = self
            .component(component)
            .ok_or_else(|| ModelError::UnknownComponent(component.to_string()))?;
        let home = self
            .deployment
            .get(&comp.id)
            .ok_or_else(|| ModelError::UnknownComponent(component.to_string()))?;
        let root = self.root_of(component);
        let self_share = 1.0 / self.replica_group(root).len() as f64;
        let owner = |op: &str| self.operation(op).map(|o| o.owner.as_str());

        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for s in &self.scenarios {
            for pair in s.steps.windows(2) {
                let (o1, o2) = (owner(&pair[0]), owner(&pair[1]));
                let other = match (o1, o2) {
                    (Some(x), Some(y)) if x == root && y != root => &pair[1],
                    (Some(x), Some(y)) if y == root && x != root => &pair[0],
                    _ => continue,
                };
                for (_, node, share) in self.placements(other) {
                    if node != home {
                        *out.entry(node.to_string()).or_insert(0.0) += s.arrival_rate * self_share * share;
                    }
                }
            }
        }
        Ok(out)
    }
}


#[cfg(test)]
mod tests {
    use super::testing::small;
    use super::*;
    use alloc::vec;

    #[test]
    fn small_model_is_valid() {
        assert_eq!(small().validate(), vec![]);
    }

    #[test]
    fn minimal_model_is_valid() {
        let arch = Architecture {
            catalog: default_catalog(),
            nodes: vec![Node {
                id: "n".into(),
                instance: "t2.micro".into(),
            }],
            components: vec![Component::new("c")],
            operations: vec![Operation {
                id: "o".into(),
                owner: "c".into(),
                demand: 1.0,
            }],
            links: vec![],
            deployment: BTreeMap::from([("c".into(), "n".into())]),
            scenarios: vec![Scenario {
                id: "s".into(),
                arrival_rate: 1.0,
                steps: vec!["o".into()],
            }],
        };
        assert!(arch.validate().is_empty());
    }

    #[test]
    fn duplicate_node_id_reported_once() {
        let mut arch = small();
        arch.nodes.push(arch.nodes[0].clone());
        assert_eq!(arch.validate(), vec![Violation::new(Rule::DuplicateNodeId, "n1")]);
    }

    #[test]
    fn dangling_step_reported_once() {
        let mut arch = small();
        arch.scenarios[0].steps.push("gone".into());
        assert_eq!(
            arch.validate(),
            vec![Violation::new(Rule::DanglingOperationReference, "gone")]
        );
    }

    #[test]
    fn undeployed_component_named() {
        let mut arch = small();
        arch.deployment.remove("b");
        assert_eq!(arch.validate(), vec![Violation::new(Rule::UndeployedComponent, "b")]);
    }

    #[test]
    fn reports_every_violation() {
        let mut arch = small();
        arch.deployment.remove("b");
        arch.operations[0].demand = -1.0;
        arch.links.clear();
        let rules: Vec<Rule> = arch.validate().into_iter().map(|v| v.rule).collect();
        assert_eq!(
            rules,
            vec![Rule::InvalidDemand, Rule::UndeployedComponent, Rule::DisconnectedNode]
        );
    }

    #[test]
    fn catalog_matches_instance_table() {
        let cat = default_catalog();
        let d2 = &cat[0];
        assert_eq!((d2.speed_factor, d2.power_max, d2.cost), (4.67, 83.4, 0.46));
        let micro = cat.iter().find(|i| i.name == "t2.micro").unwrap();
        assert_eq!((micro.speed_factor, micro.power_max, micro.cost), (1.17, 6.40, 0.004));
    }

    #[test]
    fn affinity_single_adjacency() {
        let mut arch = small();
        arch.scenarios = vec![Scenario {
            id: "s".into(),
            arrival_rate: 1.0,
            steps: vec!["a1".into(), "b1".into()],
        }];
        let aff = arch.component_affinity("a").unwrap();
        assert_eq!(aff, BTreeMap::from([("n2".to_string(), 1.0)]));
    }

    #[test]
    fn affinity_is_rate_weighted() {
        // s1 (rate 2): a1 -> b1 is one adjacency to n2.
        // s2 (rate 3): c1 -> a1 is one adjacency to n2.
        let aff = small().component_affinity("a").unwrap();
        assert_eq!(aff, BTreeMap::from([("n2".to_string(), 5.0)]));
    }

    #[test]
    fn affinity_empty_when_local() {
        let mut arch = small();
        arch.deployment.insert("a".into(), "n2".into());
        assert!(arch.component_affinity("b").unwrap().is_empty());
    }

    #[test]
    fn affinity_unknown_component() {
        assert_eq!(
            small().component_affinity("zz"),
            Err(ModelError::UnknownComponent("zz".into()))
        );
    }

    #[test]
    fn latency_matrix_uses_shortest_paths() {
        let mut arch = small();
        arch.nodes.push(Node {
            id: "n3".into(),
            instance: "t2.micro".into(),
        });
        arch.links.push(Link {
            a: "n2".into(),
            b: "n3".into(),
            latency: 2.0,
        });
        let d = arch.latency_matrix();
        assert_eq!(d[0][2], 3.5);
        assert_eq!(d[2][0], 3.5);
        assert_eq!(d[1][1], 0.0);
    }
}
