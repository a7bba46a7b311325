//! Experiment drivers, file output and configuration for the `boltz-sldg`
//! command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod problems;
pub mod run;
pub mod tableau_report;

pub use config::{Epsilon, InitialCondition, RunConfig, SchemeSpec, TestKind};
pub use error::HarnessError;
pub use run::{run_limiting_euler, run_simulation, RunResult};
