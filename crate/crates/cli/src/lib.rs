//! Configuration, run orchestration and file output for the `dtn-afem` command.

pub mod config;
pub mod run;
pub mod vtk;

pub use config::{parse_config, ConfigError, Mode, RunConfig, Scenario};
pub use run::{run, RunError};
