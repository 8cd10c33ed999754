//! Experiment registry, configuration, execution and output files.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, registry_names, registry_spec, ExperimentSpec, Mode, SweepGrid};
pub use output::{write_outputs, Format};
pub use run::{run_experiment, run_sweep, ExperimentOutput, SweepResult};
