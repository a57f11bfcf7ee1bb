//! Configuration, presets, and orchestration of runs on disk.

mod config;
mod preset;
mod run;

pub use config::{
    parse_regime, AuditParams, ConfigError, ExperimentConfig, GridParams, InitialSpec, Model,
    OutputParams, TimeParams, DEFAULT_RESIDUAL_TOLERANCE,
};
pub use preset::{preset, preset_box, PresetError, PresetName, DEFAULT_FRACTIONAL_ALPHA, PRESET_N};
pub use run::{
    output_root, run_experiment, run_experiment_in, sweep, RunError, RunOutcome, Simulation,
    SweepEntry, CEILING_SLACK, CHECKPOINT_FILE, META_FILE, OUTPUT_ROOT_ENV, REPORT_FILE,
    SWEEP_SUMMARY_FILE, TIMESERIES_FILE,
};
