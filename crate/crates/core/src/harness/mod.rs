//! Experiment orchestration: configuration, seeded pools, training loops
//! with data reuse, trial averaging and named presets.

mod config;
mod pool;
pub mod preset;
mod trial;

pub use config::{ExperimentConfig, Method, PoolOrder};
pub use pool::{build_pool, build_test_set, InputPool};
pub use preset::{preset, single_baseline, LabeledConfig, Preset, PRESET_NAMES};
pub use trial::{
    average_curves, run_experiment, run_experiment_with_threads, run_trial, ExperimentResult,
    LearningCurve,
};
