//! Bundled model of a train-ticket booking system with three request types
//! (Login, Update user details, Rebook a ticket). Service demands, arrival
//! rates and link latencies are synthetic.

use archopt_core::Architecture;

use crate::io::parse_architecture;

pub const TTBS_JSON: &str = include_str!("../fixtures/ttbs.json");

pub fn ttbs() -> Architecture {
    parse_architecture(TTBS_JSON).expect("bundled fixture is valid")
}
