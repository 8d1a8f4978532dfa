//! Shared generators for the integration tests.

use std::collections::BTreeMap;

use archopt_core::model::default_catalog;
use archopt_core::refactor::{apply, RefactoringAction};
use archopt_core::{Architecture, Component, Link, Node, Operation, Scenario};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random valid architecture with at most 6 nodes and 5 scenarios, scaled so
/// that no node exceeds 90% utilization. Some draws clone a node so that
/// replica traffic splitting is exercised too.
pub fn random_architecture(rng: &mut ChaCha8Rng) -> Architecture {
    let catalog = default_catalog();
    let n_nodes = rng.random_range(1..=5);
    let nodes: Vec<Node> = (0..n_nodes)
        .map(|i| Node {
            id: format!("n{i}"),
            instance: catalog.choose(rng).unwrap().name.clone(),
        })
        .collect();
    let n_comp = rng.random_range(1..=7);
    let components: Vec<Component> = (0..n_comp).map(|i| Component::new(&format!("c{i}"))).collect();
    let deployment = components
        .iter()
        .map(|c| (c.id.clone(), nodes.choose(rng).unwrap().id.clone()))
        .collect();
    let n_ops = rng.random_range(1..=10);
    let operations: Vec<Operation> = (0..n_ops)
        .map(|i| Operation {
            id: format!("o{i}"),
            owner: components.choose(rng).unwrap().id.clone(),
            demand: rng.random_range(0.0..20.0),
        })
        .collect();
    let mut links = Vec::new();
    for i in 1..n_nodes {
        let j = rng.random_range(0..i);
        links.push(Link {
            a: format!("n{j}"),
            b: format!("n{i}"),
            latency: rng.random_range(0.0..3.0),
        });
    }
    let scenarios: Vec<Scenario> = (0..rng.random_range(1..=5))
        .map(|i| Scenario {
            id: format!("s{i}"),
            arrival_rate: rng.random_range(0.1..10.0),
            steps: (0..rng.random_range(1..=6))
                .map(|_| operations.choose(rng).unwrap().id.clone())
                .collect(),
        })
        .collect();
    let mut arch = Architecture {
        catalog,
        nodes,
        components,
        operations,
        links,
        deployment,
        scenarios,
    };
    if rng.random_bool(0.3) {
        let target = arch.nodes.choose(rng).unwrap().id.clone();
        if let Ok(cloned) = apply(&RefactoringAction::clon(&target), &arch) {
            arch = cloned;
        }
    }
    let peak = solve_peak(&arch);
    if peak > 0.0 {
        let scale = rng.random_range(0.05..0.9) / peak;
        for s in &mut arch.scenarios {
            s.arrival_rate *= scale;
        }
    }
    assert!(arch.validate().is_empty(), "generator produced an invalid model");
    arch
}

/// Highest node utilization at the current rates, ignoring saturation.
fn solve_peak(arch: &Architecture) -> f64 {
    let mut load: BTreeMap<&str, f64> = BTreeMap::new();
    for s in &arch.scenarios {
        for op in &s.steps {
            for (_, node, share) in arch.placements(op) {
                let inst = arch.node_instance(node).unwrap();
                let demand = arch.operation(op).unwrap().demand;
                *load.entry(node).or_default() += share * s.arrival_rate * demand / (1000.0 * inst.speed_factor);
            }
        }
    }
    load.values().copied().fold(0.0, f64::max)
}
