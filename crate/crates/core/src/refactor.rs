//! Refactoring actions and their application to an [`Architecture`].
//!
//! | kind | target    | extra field    | effect                                              |
//! |------|-----------|----------------|-----------------------------------------------------|
//! | REDO | component | `new_instance` | component moves to a fresh node                     |
//! | MOVE | operation | `destination`  | operation changes owner                             |
//! | CLON | node      |                | replica node with replica components                |
//! | MOTN | operation | `new_instance` | operation moves to a fresh component on a fresh node|
//! | DROP | node      |                | node removed, components relocated by affinity      |
//!
//! Application is pure: every function takes the architecture by reference
//! and returns a new one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Architecture, Component, Link, Node};

/// Attempts made by [`random_action`] before giving up.
pub const RANDOM_ACTION_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ActionKind {
    Redo,
    Move,
    Clon,
    Motn,
    Drop,
}

/// Kind of architectural element an action targets or relocates to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ElementKind {
    Node,
    Component,
    Operation,
}

impl ElementKind {
    pub fn letter(self) -> char {
        match self {
            ElementKind::Node => 'N',
            ElementKind::Component => 'C',
            ElementKind::Operation => 'O',
        }
    }
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Redo,
        ActionKind::Move,
        ActionKind::Clon,
        ActionKind::Motn,
        ActionKind::Drop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Redo => "REDO",
            ActionKind::Move => "MOVE",
            ActionKind::Clon => "CLON",
            ActionKind::Motn => "MOTN",
            ActionKind::Drop => "DROP",
        }
    }

    pub fn target_kind(self) -> ElementKind {
        match self {
            ActionKind::Redo => ElementKind::Component,
            ActionKind::Move | ActionKind::Motn => ElementKind::Operation,
            ActionKind::Clon | ActionKind::Drop => ElementKind::Node,
        }
    }

    /// Node count change caused by one successful application.
    pub fn node_delta(self) -> i64 {
        match self {
            ActionKind::Redo | ActionKind::Clon | ActionKind::Motn => 1,
            ActionKind::Move => 0,
            ActionKind::Drop => -1,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RefactoringAction {
    pub kind: ActionKind,
    pub target: String,
    #[serde(default)]
    pub destination: Option<String>,
    #[serde(default)]
    pub new_instance: Option<String>,
}

impl RefactoringAction {
    pub fn redo(component: &str, instance: &str) -> Self {
        Self {
            kind: ActionKind::Redo,
            target: component.to_string(),
            destination: None,
            new_instance: Some(instance.to_string()),
        }
    }

    pub fn move_op(operation: &str, component: &str) -> Self {
        Self {
            kind: ActionKind::Move,
            target: operation.to_string(),
            destination: Some(component.to_string()),
            new_instance: None,
        }
    }

    pub fn clon(node: &str) -> Self {
        Self {
            kind: ActionKind::Clon,
            target: node.to_string(),
            destination: None,
            new_instance: None,
        }
    }

    pub fn motn(operation: &str, instance: &str) -> Self {
        Self {
            kind: ActionKind::Motn,
            target: operation.to_string(),
            destination: None,
            new_instance: Some(instance.to_string()),
        }
    }

    pub fn drop_node(node: &str) -> Self {
        Self {
            kind: ActionKind::Drop,
            target: node.to_string(),
            destination: None,
            new_instance: None,
        }
    }

    fn well_formed(&self) -> bool {
        match self.kind {
            ActionKind::Move => self.destination.is_some() && self.new_instance.is_none(),
            ActionKind::Redo | ActionKind::Motn => self.new_instance.is_some() && self.destination.is_none(),
            ActionKind::Clon | ActionKind::Drop => self.destination.is_none() && self.new_instance.is_none(),
        }
    }
}

impl fmt::Display for RefactoringAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.kind, self.target)?;
        if let Some(d) = &self.destination {
            write!(f, " -> {d}")?;
        }
        if let Some(i) = &self.new_instance {
            write!(f, " on {i}")?;
        }
        f.write_str(")")
    }
}

/// An ordered list of at most [`RefactoringSequence::MAX_LEN`] actions.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<RefactoringAction>", into = "Vec<RefactoringAction>")]
pub struct RefactoringSequence(Vec<RefactoringAction>);

impl RefactoringSequence {
    pub const MAX_LEN: usize = 4;

    pub fn new(actions: Vec<RefactoringAction>) -> Result<Self, RefactorError> {
        if actions.len() > Self::MAX_LEN {
            return Err(RefactorError::TooLong(actions.len()));
        }
        Ok(Self(actions))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn actions(&self) -> &[RefactoringAction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn actions_mut(&mut self) -> &mut Vec<RefactoringAction> {
        &mut self.0
    }
}

impl TryFrom<Vec<RefactoringAction>> for RefactoringSequence {
    type Error = RefactorError;
    fn try_from(v: Vec<RefactoringAction>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<RefactoringSequence> for Vec<RefactoringAction> {
    fn from(s: RefactoringSequence) -> Self {
        s.0
    }
}

/// Why an action cannot be applied to a given architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ActionViolation {
    #[error("fields do not match the action kind")]
    Malformed,
    #[error("unknown target")]
    UnknownTarget,
    #[error("unknown destination")]
    UnknownDestination,
    #[error("unknown instance type")]
    UnknownInstance,
    #[error("no-op move")]
    NoOpMove,
    #[error("destination is a replica")]
    ReplicaDestination,
    #[error("empty node")]
    EmptyNode,
    #[error("last node")]
    LastNode,
    #[error("no neighbor to relocate to")]
    NoNeighbor,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefactorError {
    #[error("precondition violated: {0}")]
    Precondition(ActionViolation),
    #[error("action {index} is infeasible: {violation}")]
    Infeasible { index: usize, violation: ActionViolation },
    #[error("no valid action found after {0} attempts")]
    Exhausted(usize),
    #[error("sequence of {0} actions exceeds the maximum length")]
    TooLong(usize),
}

/// Architectural context of an action at the time it was applied; feeds the
/// complexity objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionContext {
    pub kind: ActionKind,
    pub degree: usize,
    pub max_degree: usize,
}

impl ActionContext {
    /// `1 + degree / max_degree`, in `[1, 2]`; 1 when no element of the kind
    /// has any connection.
    pub fn arch_factor(&self) -> f64 {
        if self.max_degree == 0 {
            1.0
        } else {
            1.0 + self.degree as f64 / self.max_degree as f64
        }
    }
}

/// Result of applying a whole sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub architecture: Architecture,
    pub trace: Vec<ActionContext>,
}

pub fn precheck(action: &RefactoringAction, arch: &Architecture) -> Result<(), ActionViolation> {
    use ActionViolation::*;
    if !action.well_formed() {
        return Err(Malformed);
    }
    if let Some(inst) = &action.new_instance {
        if arch.instance(inst).is_none() {
            return Err(UnknownInstance);
        }
    }
    match action.kind {
        ActionKind::Redo => {
            if !arch.deployment.contains_key(&action.target) || arch.component(&action.target).is_none() {
                return Err(UnknownTarget);
            }
        }
        ActionKind::Move => {
            let op = arch.operation(&action.target).ok_or(UnknownTarget)?;
            let dest = action.destination.as_deref().unwrap_or_default();
            let comp = arch.component(dest).ok_or(UnknownDestination)?;
            if comp.replica_of.is_some() {
                return Err(ReplicaDestination);
            }
            if op.owner == dest {
                return Err(NoOpMove);
            }
        }
        ActionKind::Motn => {
            arch.operation(&action.target).ok_or(UnknownTarget)?;
        }
        ActionKind::Clon => {
            arch.node(&action.target).ok_or(UnknownTarget)?;
            if arch.components_on(&action.target).is_empty() {
                return Err(EmptyNode);
            }
        }
        ActionKind::Drop => {
            arch.node(&action.target).ok_or(UnknownTarget)?;
            if arch.nodes.len() <= 1 {
                return Err(LastNode);
            }
            if arch.neighbors(&action.target).is_empty() {
                return Err(NoNeighbor);
            }
        }
    }
    Ok(())
}

/// First id of the form `base`, `base.2`, `base.3`, ... for which `taken` is false.
fn fresh_id(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{base}.{i}")).find(|id| !taken(id)).unwrap()
}

fn fresh_node_id(arch: &Architecture, base: &str) -> String {
    fresh_id(base, |id| arch.node(id).is_some())
}

fn fresh_component_id(arch: &Architecture, base: &str) -> String {
    fresh_id(base, |id| arch.component(id).is_some())
}

/// Links a new node to every neighbor of `original` (copying latencies) and to
/// `original` itself.
fn mirror_links(arch: &mut Architecture, original: &str, new_node: &str) {
    let fallback = arch.max_link_latency();
    let copies: Vec<Link> = arch
        .links
        .iter()
        .filter_map(|l| {
            l.other(original).map(|m| Link {
                a: new_node.to_string(),
                b: m.to_string(),
                latency: l.latency,
            })
        })
        .collect();
    arch.links.extend(copies);
    arch.links.push(Link {
        a: new_node.to_string(),
        b: original.to_string(),
        latency: fallback,
    });
}

/// Applies one action after checking its preconditions.
pub fn apply(action: &RefactoringAction, arch: &Architecture) -> Result<Architecture, RefactorError> {
    precheck(action, arch).map_err(RefactorError::Precondition)?;
    let mut out = arch.clone();
    match action.kind {
        ActionKind::Redo => {
            let instance = action.new_instance.clone().unwrap();
            let original = arch.deployment[&action.target].clone();
            let id = fresh_node_id(arch, &format!("{}-node", action.target));
            out.nodes.push(Node {
                id: id.clone(),
                instance,
            });
            mirror_links(&mut out, &original, &id);
            out.deployment.insert(action.target.clone(), id);
        }
        ActionKind::Move => {
            let dest = action.destination.clone().unwrap();
            let op = out.operations.iter_mut().find(|o| o.id == action.target).unwrap();
            op.owner = dest;
        }
        ActionKind::Clon => {
            let original = action.target.as_str();
            let instance = arch.node(original).unwrap().instance.clone();
            let id = fresh_node_id(arch, &format!("{original}-clone"));
            out.nodes.push(Node {
                id: id.clone(),
                instance,
            });
            mirror_links(&mut out, original, &id);
            for c in arch.components_on(original) {
                let replica = fresh_component_id(&out, &format!("{c}@{id}"));
                out.components.push(Component {
                    id: replica.clone(),
                    replica_of: Some(arch.root_of(c).to_string()),
                });
                out.deployment.insert(replica, id.clone());
            }
        }
        ActionKind::Motn => {
            let instance = action.new_instance.clone().unwrap();
            let op = action.target.as_str();
            let node_id = fresh_node_id(arch, &format!("{op}-node"));
            let comp_id = fresh_component_id(arch, &format!("{op}-svc"));

            // Previous hosts plus every caller and callee host.
            let mut peers: BTreeSet<&str> = arch.placements(op).into_iter().map(|(_, n, _)| n).collect();
            for s in &arch.scenarios {
                for pair in s.steps.windows(2) {
                    let other = if pair[1] == op {
                        &pair[0]
                    } else if pair[0] == op {
                        &pair[1]
                    } else {
                        continue;
                    };
                    if other != op {
                        peers.extend(arch.placements(other).into_iter().map(|(_, n, _)| n));
                    }
                }
            }
            let latency = arch.max_link_latency();
            out.nodes.push(Node {
                id: node_id.clone(),
                instance,
            });
            out.components.push(Component::new(&comp_id));
            out.deployment.insert(comp_id.clone(), node_id.clone());
            for p in peers {
                out.links.push(Link {
                    a: node_id.clone(),
                    b: p.to_string(),
                    latency,
                });
            }
            out.operations.iter_mut().find(|o| o.id == op).unwrap().owner = comp_id;
        }
        ActionKind::Drop => {
            let dropped = action.target.as_str();
            let neighbors = arch.neighbors(dropped);
            for c in arch.components_on(dropped) {
                let affinity = arch.component_affinity(c).unwrap_or_default();
                let dest = relocation_target(&neighbors, &affinity);
                out.deployment.insert(c.to_string(), dest.to_string());
            }
            // Bridge the neighbors so no pair loses its path through the dropped node.
            let hop = |m: &str| arch.link_between(dropped, m).map_or(0.0, |l| l.latency);
            for (i, x) in neighbors.iter().enumerate() {
                for y in &neighbors[i + 1..] {
                    if arch.link_between(x, y).is_none() {
                        out.links.push(Link {
                            a: x.to_string(),
                            b: y.to_string(),
                            latency: hop(x) + hop(y),
                        });
                    }
                }
            }
            out.links.retain(|l| !l.touches(dropped));
            out.nodes.retain(|n| n.id != dropped);
        }
    }
    Ok(out)
}

/// Neighbor with the highest affinity; ties go to the smallest id.
/// `neighbors` must be sorted and non-empty.
pub fn relocation_target<'a>(neighbors: &[&'a str], affinity: &BTreeMap<String, f64>) -> &'a str {
    let mut best = neighbors[0];
    let mut best_score = affinity.get(best).copied().unwrap_or(0.0);
    for &n in &neighbors[1..] {
        let score = affinity.get(n).copied().unwrap_or(0.0);
        if score > best_score {
            best = n;
            best_score = score;
        }
    }
    best
}

/// Applies a sequence left to right, recording each action's context.
/// Fails with [`RefactorError::Infeasible`] at the first action whose
/// preconditions do not hold on the intermediate architecture.
pub fn apply_sequence(seq: &RefactoringSequence, arch0: &Architecture) -> Result<Applied, RefactorError> {
    let mut arch = arch0.clone();
    let mut trace = Vec::with_capacity(seq.len());
    for (index, action) in seq.actions().iter().enumerate() {
        precheck(action, &arch).map_err(|violation| RefactorError::Infeasible { index, violation })?;
        trace.push(action_context(action, &arch));
        arch = apply(action, &arch)?;
    }
    Ok(Applied {
        architecture: arch,
        trace,
    })
}

/// Degree of every element of the given kind.
///
/// - operation: distinct operations adjacent to it in some scenario, plus
///   the other operations of its owner;
/// - component: distinct components adjacent to it in some scenario (through
///   the operations it serves), plus the components co-deployed on its node;
/// - node: distinct nodes exchanging messages with it, plus the components it
///   hosts.
pub fn degrees(arch: &Architecture, kind: ElementKind) -> BTreeMap<&str, usize> {
    let pairs = arch
        .scenarios
        .iter()
        .flat_map(|s| s.steps.windows(2))
        .filter(|w| w[0] != w[1]);
    match kind {
        ElementKind::Operation => {
            let mut adj: BTreeMap<&str, BTreeSet<&str>> = arch
                .operations
                .iter()
                .map(|o| (o.id.as_str(), BTreeSet::new()))
                .collect();
            for w in pairs {
                if let Some(set) = adj.get_mut(w[0].as_str()) {
                    set.insert(&w[1]);
                }
                if let Some(set) = adj.get_mut(w[1].as_str()) {
                    set.insert(&w[0]);
                }
            }
            let mut per_owner: BTreeMap<&str, usize> = BTreeMap::new();
            for o in &arch.operations {
                *per_owner.entry(&o.owner).or_default() += 1;
            }
            arch.operations
                .iter()
                .map(|o| {
                    (
                        o.id.as_str(),
                        adj[o.id.as_str()].len() + per_owner[o.owner.as_str()] - 1,
                    )
                })
                .collect()
        }
        ElementKind::Component => {
            let owner: BTreeMap<&str, &str> = arch
                .operations
                .iter()
                .map(|o| (o.id.as_str(), o.owner.as_str()))
                .collect();
            let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for w in pairs {
                if let (Some(&x), Some(&y)) = (owner.get(w[0].as_str()), owner.get(w[1].as_str())) {
                    if x != y {
                        adj.entry(x).or_default().insert(y);
                        adj.entry(y).or_default().insert(x);
                    }
                }
            }
            let mut per_node: BTreeMap<&str, usize> = BTreeMap::new();
            for n in arch.deployment.values() {
                *per_node.entry(n).or_default() += 1;
            }
            arch.components
                .iter()
                .map(|c| {
                    let root = arch.root_of(&c.id);
                    let a = adj.get(root).map_or(0, BTreeSet::len);
                    let co = arch.deployment.get(&c.id).map_or(0, |n| per_node[n.as_str()] - 1);
                    (c.id.as_str(), a + co)
                })
                .collect()
        }
        ElementKind::Node => {
            let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for w in pairs {
                for (_, x, _) in arch.placements(&w[0]) {
                    for (_, y, _) in arch.placements(&w[1]) {
                        if x != y {
                            adj.entry(x).or_default().insert(y);
                            adj.entry(y).or_default().insert(x);
                        }
                    }
                }
            }
            arch.nodes
                .iter()
                .map(|n| {
                    let a = adj.get(n.id.as_str()).map_or(0, BTreeSet::len);
                    (n.id.as_str(), a + arch.components_on(&n.id).len())
                })
                .collect()
        }
    }
}

pub fn action_context(action: &RefactoringAction, arch: &Architecture) -> ActionContext {
    let all = degrees(arch, action.kind.target_kind());
    ActionContext {
        kind: action.kind,
        degree: all.get(action.target.as_str()).copied().unwrap_or(0),
        max_degree: all.values().copied().max().unwrap_or(0),
    }
}

/// Samples an action that passes [`precheck`] on `arch`: a uniformly chosen
/// kind, then uniformly chosen target, destination and instance type.
pub fn random_action<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Result<RefactoringAction, RefactorError> {
    let owners: Vec<&str> = arch
        .components
        .iter()
        .filter(|c| c.replica_of.is_none())
        .map(|c| c.id.as_str())
        .collect();
    for _ in 0..RANDOM_ACTION_ATTEMPTS {
        let kind = *ActionKind::ALL.choose(rng).unwrap();
        let candidate = match kind {
            ActionKind::Redo => {
                let c = arch.components.choose(rng);
                let instance = arch.catalog.choose(rng).map(|i| i.name.as_str());
                c.zip(instance).map(|(c, i)| RefactoringAction::redo(&c.id, i))
            }
            ActionKind::Move => {
                let op = arch.operations.choose(rng);
                op.zip(owners.choose(rng))
                    .map(|(op, d)| RefactoringAction::move_op(&op.id, d))
            }
            ActionKind::Clon => arch.nodes.choose(rng).map(|n| RefactoringAction::clon(&n.id)),
            ActionKind::Motn => {
                let op = arch.operations.choose(rng);
                let instance = arch.catalog.choose(rng).map(|i| i.name.as_str());
                op.zip(instance).map(|(op, i)| RefactoringAction::motn(&op.id, i))
            }
            ActionKind::Drop => arch.nodes.choose(rng).map(|n| RefactoringAction::drop_node(&n.id)),
        };
        if let Some(action) = candidate {
            if precheck(&action, arch).is_ok() {
                return Ok(action);
            }
        }
    }
    Err(RefactorError::Exhausted(RANDOM_ACTION_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::small;
    use crate::model::{Operation, Scenario};
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drop_last_node_rejected() {
        let mut arch = small();
        arch.nodes.truncate(1);
        arch.links.clear();
        arch.deployment.values_mut().for_each(|n| *n = "n1".into());
        assert_eq!(
            precheck(&RefactoringAction::drop_node("n1"), &arch),
            Err(ActionViolation::LastNode)
        );
    }

    #[test]
    fn move_into_owner_rejected() {
        assert_eq!(
            precheck(&RefactoringAction::move_op("a1", "a"), &small()),
            Err(ActionViolation::NoOpMove)
        );
    }

    #[test]
    fn redo_accepted() {
        assert_eq!(precheck(&RefactoringAction::redo("a", "t2.micro"), &small()), Ok(()));
    }

    #[test]
    fn malformed_rejected() {
        let mut a = RefactoringAction::clon("n1");
        a.new_instance = Some("t2.micro".into());
        assert_eq!(precheck(&a, &small()), Err(ActionViolation::Malformed));
    }

    #[test]
    fn drop_relocates_everything() {
        let arch = small();
        let out = apply(&RefactoringAction::drop_node("n1"), &arch).unwrap();
        assert_eq!(out.nodes.len(), 1);
        assert_eq!(out.deployment["a"], "n2");
        assert!(out.validate().is_empty());
        assert_eq!(arch, small());
    }

    #[test]
    fn drop_bridges_neighbors() {
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
        let out = apply(&RefactoringAction::drop_node("n2"), &arch).unwrap();
        assert_eq!(out.links.len(), 1);
        assert_eq!(out.links[0].latency, 3.5);
        assert!(out.validate().is_empty());
    }

    #[test]
    fn drop_follows_affinity() {
        // n2 hosts b, c. Drop n2 with neighbors n1 (hosts a) and n3 (hosts d).
        let mut arch = small();
        arch.nodes.push(Node {
            id: "n3".into(),
            instance: "t2.micro".into(),
        });
        arch.components.push(Component::new("d"));
        arch.deployment.insert("d".into(), "n3".into());
        arch.operations.push(Operation {
            id: "d1".into(),
            owner: "d".into(),
            demand: 1.0,
        });
        arch.links.push(Link {
            a: "n2".into(),
            b: "n3".into(),
            latency: 1.0,
        });
        arch.scenarios.push(Scenario {
            id: "s3".into(),
            arrival_rate: 10.0,
            steps: vec!["b1".into(), "d1".into()],
        });
        let out = apply(&RefactoringAction::drop_node("n2"), &arch).unwrap();
        // b talks to d at rate 10 versus a at rate 2.
        assert_eq!(out.deployment["b"], "n3");
        // c talks to a at rate 3, never to d.
        assert_eq!(out.deployment["c"], "n1");
    }

    #[test]
    fn clon_duplicates_components_and_links() {
        let arch = small();
        let out = apply(&RefactoringAction::clon("n2"), &arch).unwrap();
        assert_eq!(out.nodes.len(), 3);
        let clone = &out.nodes[2].id;
        assert_eq!(clone, "n2-clone");
        let hosted = out.components_on(clone);
        assert_eq!(hosted, vec!["b@n2-clone", "c@n2-clone"]);
        assert!(out.link_between(clone, "n1").is_some());
        assert!(out.link_between(clone, "n2").is_some());
        assert!(out.validate().is_empty());
        assert_eq!(out.placements("b1").len(), 2);
    }

    #[test]
    fn clon_of_replica_extends_group() {
        let arch = small();
        let once = apply(&RefactoringAction::clon("n2"), &arch).unwrap();
        let twice = apply(&RefactoringAction::clon("n2-clone"), &once).unwrap();
        assert!(twice.validate().is_empty());
        let p = twice.placements("b1");
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|&(_, _, s)| (s - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn redo_links_like_original() {
        let out = apply(&RefactoringAction::redo("a", "t2.micro"), &small()).unwrap();
        assert_eq!(out.deployment["a"], "a-node");
        assert!(out.link_between("a-node", "n2").is_some());
        assert!(out.link_between("a-node", "n1").is_some());
        assert!(out.validate().is_empty());
    }

    #[test]
    fn motn_creates_component_and_node() {
        let out = apply(&RefactoringAction::motn("b1", "m6i.xlarge"), &small()).unwrap();
        assert_eq!(out.operation("b1").unwrap().owner, "b1-svc");
        assert_eq!(out.deployment["b1-svc"], "b1-node");
        // previous host n2, caller a1 on n1, callee c1 on n2
        assert_eq!(out.neighbors("b1-node"), vec!["n1", "n2"]);
        assert!(out.validate().is_empty());
    }

    #[test]
    fn move_changes_owner_only() {
        let arch = small();
        let out = apply(&RefactoringAction::move_op("a1", "b"), &arch).unwrap();
        assert_eq!(out.operation("a1").unwrap().owner, "b");
        assert_eq!(out.nodes, arch.nodes);
    }

    #[test]
    fn sequence_reports_failing_index() {
        let seq = RefactoringSequence::new(vec![
            RefactoringAction::drop_node("n1"),
            RefactoringAction::drop_node("n1"),
        ])
        .unwrap();
        assert_eq!(
            apply_sequence(&seq, &small()),
            Err(RefactorError::Infeasible {
                index: 1,
                violation: ActionViolation::UnknownTarget
            })
        );
    }

    #[test]
    fn empty_sequence_is_identity() {
        let applied = apply_sequence(&RefactoringSequence::empty(), &small()).unwrap();
        assert_eq!(applied.architecture, small());
        assert!(applied.trace.is_empty());
    }

    #[test]
    fn sequence_longer_than_four_rejected() {
        let actions = vec![RefactoringAction::clon("n1"); 5];
        assert_eq!(RefactoringSequence::new(actions), Err(RefactorError::TooLong(5)));
    }

    #[test]
    fn degrees_small() {
        let arch = small();
        // a1 adjacent to b1 and c1; b1 to a1, c1; c1 to b1, a1.
        let ops = degrees(&arch, ElementKind::Operation);
        assert_eq!(ops["a1"], 2);
        // a adjacent to b, c; b adjacent to a, c plus co-resident c.
        let comps = degrees(&arch, ElementKind::Component);
        assert_eq!(comps["a"], 2);
        assert_eq!(comps["b"], 3);
        let nodes = degrees(&arch, ElementKind::Node);
        assert_eq!(nodes["n1"], 2);
        assert_eq!(nodes["n2"], 3);
    }

    #[test]
    fn random_action_deterministic() {
        let arch = small();
        let a = random_action(&arch, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = random_action(&arch, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_action_never_drops_single_node() {
        let mut arch = small();
        arch.nodes.truncate(1);
        arch.links.clear();
        arch.components.truncate(1);
        arch.operations.truncate(1);
        arch.deployment = BTreeMap::from([("a".into(), "n1".into())]);
        arch.scenarios.truncate(1);
        arch.scenarios[0].steps = vec!["a1".into()];
        assert!(arch.validate().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let a = random_action(&arch, &mut rng).unwrap();
            assert_ne!(a.kind, ActionKind::Drop);
        }
    }
}
