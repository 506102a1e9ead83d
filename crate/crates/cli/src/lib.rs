//! Parameter sweeps over the mean-field model, written as CSV tables.
//!
//! A run is described by a JSON [`config::RunConfig`]; [`run::execute`]
//! evaluates it on a bounded thread pool and writes the table with the
//! resolved config echoed in `#` comment lines.

pub mod config;
pub mod run;
pub mod table;

pub use config::{parse_config, parse_config_with, ConfigError, Mode, RunConfig};
pub use run::{execute, run, RunError};
pub use table::{Cell, ResultTable};
