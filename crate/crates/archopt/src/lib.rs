//! File formats, experiment orchestration and the `archopt` command line
//! built on [`archopt_core`].

pub mod cli;
pub mod config;
pub mod experiment;
pub mod fixture;
pub mod front;
pub mod io;
pub mod report;

pub use config::Config;
pub use front::FrontRow;
pub use io::{load_architecture, parse_architecture, save_architecture, LoadError};
