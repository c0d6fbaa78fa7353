//! Scenario files, presets and the runner behind the command-line tool.

pub mod config;
pub mod presets;
pub mod run;

pub use config::{parse_config, ConfigError, ConfigErrors, ScenarioConfig};
pub use presets::{preset, preset_names, preset_text};
pub use run::{build_scenario, run_scenario, write_rows, Check, RunFailure, RunOutcome, Row, Scenario};
