//! Command-line front end for the holotrap simulations: declarative TOML run
//! configurations in, deterministic CSV and JSON records out.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, Experiment, Plan, RunConfig};
pub use run::{exit, run, RunError, RunOptions, RunSummary};
