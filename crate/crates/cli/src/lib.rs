//! Scenario parsing, command dispatch and result files for the `thzlab` binary.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use error::CliError;
pub use output::Report;
pub use scenario::{Resolved, ScenarioFile};
