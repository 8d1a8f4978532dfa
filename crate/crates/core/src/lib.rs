//! Search for sustainable deployments of microservice architectures.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the whole algorithmic
//! pipeline:
//!
//! - [`model`]: the architecture description and its validation,
//! - [`solver`]: an open multiclass queueing approximation producing node and
//!   entry utilizations and response times,
//! - [`objectives`]: power, response time, cost and complexity,
//! - [`refactor`]: the five refactoring actions (REDO, MOVE, CLON, MOTN, DROP),
//! - [`nsga2`]: NSGA-II over refactoring sequences and super-front construction,
//! - [`attribution`]: per-request-type power and cost attribution,
//! - [`stats`]: Hodges-Lehmann, Mann-Whitney U, Cliff's delta, the sustainability
//!   penalty report and refactoring-action frequencies.
//!
//! File formats, the experiment runner and the CLI live in the `archopt` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attribution;
pub mod model;
pub mod nsga2;
pub mod objectives;
pub mod refactor;
pub mod solver;
pub mod stats;

pub use model::{Architecture, Component, InstanceType, Link, ModelError, Node, Operation, Scenario, Violation};
pub use nsga2::{ExperimentConfig, Individual};
pub use objectives::{ComplexityCatalog, Objective, ObjectiveSet, ObjectiveVector, PowerParams};
pub use refactor::{ActionKind, RefactorError, RefactoringAction, RefactoringSequence};
pub use solver::{solve, SolverResult};
