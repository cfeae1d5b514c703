//! Files, configuration, the experiment protocol and report emission around `kmo-core`.
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod oracle;
pub mod report;
pub mod wire;

pub use config::RunConfig;
pub use error::{CliError, DataError};
pub use experiment::{run_experiment, run_one};
pub use report::{emit_results, Format, RunReport};
