//! Scenario registry, configuration, experiment runner and output files.

pub mod config;
pub mod output;
pub mod runner;
pub mod scenarios;

pub use config::{Config, ExperimentKind, OUTPUT_DIR_ENV};
pub use runner::{run_experiment, RunOutcome};
pub use scenarios::{builtin_scenarios, build_scenario, load_scenario, uniform_rescale, Scenario, ScenarioParams};
