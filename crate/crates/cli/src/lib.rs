//! Experiment runner: configuration, presets and artifact output.

pub mod artifacts;
pub mod config;
pub mod presets;

use std::process::ExitCode;

pub use artifacts::{run_experiment, OutcomeDocument, RunReport};
pub use config::{parse_args, resolve, Args, ConfigError, Invocation};
pub use presets::{find as find_preset, presets, ExperimentPreset};

/// Exit status of a completed run: success iff every transaction converged.
pub fn exit_status(report: &RunReport) -> ExitCode {
    if report.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Runs a named preset into `out` with no overrides.
pub fn run_preset(name: &str, out: &std::path::Path) -> anyhow::Result<RunReport> {
    let preset = find_preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    Ok(run_experiment(preset.name, &preset.config, out)?)
}
