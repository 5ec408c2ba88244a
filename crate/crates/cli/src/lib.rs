//! Configuration and orchestration behind the `gsrep` binary.

pub mod config;
pub mod run;

pub use config::RunConfig;
pub use run::{run, Command, Outcome};
