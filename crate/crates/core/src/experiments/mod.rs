//! Configuration-driven experiment harness: Monte-Carlo sweeps over delays,
//! data-set sizes, and online triggering, with CSV and JSON emission.

mod config;
mod data;
mod runner;
mod table;

pub use config::{
    BoundConfig, DataConfig, DatasetSweepConfig, DelaySweepConfig, ExperimentConfig,
    ExperimentKind, GainsConfig, KernelConfig, NoiseConfig, OnlineConfig, PlantConfig,
    ReferenceConfig, Resolved, TradeoffConfig,
};
pub use data::{derive_seed, fit_initial_model, initial_inputs, noisy_targets, SALT_DATA, SALT_RUN, SALT_TRIAL};
pub use runner::{
    constants_for_model, loop_constants, run_dataset_sweep, run_delay_sweep, run_online_trigger,
    run_tradeoff_report, validate_experiment, LoopConstants, TradeoffEntry, TradeoffRunReport,
};
pub use table::{error_series_csv, format_float, write_error_series, ResultTable, RunRecord, SweepRow};
