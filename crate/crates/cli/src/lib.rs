//! Scenario-driven front end for `pr-filtration`: scenario files, CSV/JSON
//! export, and the self-check suite behind the `prfilt` binary.

pub mod cli;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod scenario;
pub mod selfcheck;

pub use error::{CliError, CliResult};
pub use scenario::Scenario;
