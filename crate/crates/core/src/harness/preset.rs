//! Named experiment settings for the learning-curve figures.

use crate::error::{Result, ScmError};
use crate::harness::config::{ExperimentConfig, Method};

/// One labelled arm of a preset.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledConfig {
    pub label: String,
    pub config: ExperimentConfig,
}

/// A named set of configurations plotted together.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: String,
    pub description: &'static str,
    pub runs: Vec<LabeledConfig>,
}

impl Preset {
    pub fn get(&self, label: &str) -> Option<&ExperimentConfig> {
        self.runs
            .iter()
            .find(|r| r.label == label)
            .map(|r| &r.config)
    }
}

pub const PRESET_NAMES: [&str; 8] = [
    "fig2",
    "fig2-desk",
    "fig4",
    "fig4-desk",
    "fig5",
    "fig5-desk",
    "fig6",
    "fig6-desk",
];

/// Weight-decay coefficients tried for the L2 comparison.
pub const L2_ALPHA_GRID: [f64; 4] = [1e-5, 1e-4, 1e-3, 1e-2];

/// Learning rate of the ensemble-size comparison.
pub const ENSEMBLE_ETA: f64 = 0.1;

const TRIALS: usize = 10;

fn labeled(label: impl Into<String>, config: ExperimentConfig) -> LabeledConfig {
    LabeledConfig {
        label: label.into(),
        config,
    }
}

/// K = K' = 2 students, ensembles of 1 to 4 of them, pool of 10 N.
fn ensemble_sizes(n: usize) -> Vec<LabeledConfig> {
    (1..=4)
        .map(|k_en| {
            let method = if k_en == 1 {
                Method::Single
            } else {
                Method::Ensemble
            };
            let mut c = ExperimentConfig::new(n, 2, 2 * k_en, method, ENSEMBLE_ETA, 10 * n);
            c.k_en = k_en;
            c.duration = 100.0;
            c.trials = TRIALS;
            let label = if k_en == 1 {
                "single".to_string()
            } else {
                format!("m{k_en}")
            };
            labeled(label, c)
        })
        .collect()
}

/// 100-unit student against a 2-unit teacher, `pool` stored examples.
fn wide_student(n: usize, method: Method, pool: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(n, 2, 100, method, 0.01, pool);
    c.duration = 500.0;
    c.trials = TRIALS;
    c
}

fn overfitting(n: usize) -> Vec<LabeledConfig> {
    let sgd = wide_student(n, Method::Sgd, n);
    let mut dropout = wide_student(n, Method::Dropout, n);
    dropout.p = 0.5;
    let mut runs = vec![labeled("sgd", sgd), labeled("dropout", dropout)];
    for r in &mut runs {
        r.config.plot_learn = true;
    }
    runs
}

fn dropout_vs_ensemble(n: usize) -> Vec<LabeledConfig> {
    let mut ensemble = wide_student(n, Method::Ensemble, n);
    ensemble.k_en = 2;
    let mut dropout = wide_student(n, Method::Dropout, n);
    dropout.p = 0.5;
    vec![labeled("ensemble", ensemble), labeled("dropout", dropout)]
}

fn weight_decay(n: usize) -> Vec<LabeledConfig> {
    L2_ALPHA_GRID
        .iter()
        .map(|&alpha| {
            let mut c = wide_student(n, Method::L2, n);
            c.alpha = alpha;
            labeled(format!("l2-{alpha:e}"), c)
        })
        .collect()
}

/// The fixed-size ensemble baseline matching an ensemble arm: one of its
/// members trained alone.
pub fn single_baseline(ensemble: &ExperimentConfig) -> ExperimentConfig {
    let mut c = ensemble.clone();
    c.method = Method::Single;
    c
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    let (description, runs) = match name {
        "fig2" => (
            "ensembles of 1-4 students, N = 10000",
            ensemble_sizes(10_000),
        ),
        "fig2-desk" => ("ensembles of 1-4 students, N = 1000", ensemble_sizes(1000)),
        "fig4" => ("SGD vs dropout overfitting, N = 1000", overfitting(1000)),
        "fig4-desk" => ("SGD vs dropout overfitting, N = 200", overfitting(200)),
        "fig5" => (
            "dropout vs ensemble of two 50-unit machines, N = 1000",
            dropout_vs_ensemble(1000),
        ),
        "fig5-desk" => (
            "dropout vs ensemble of two 50-unit machines, N = 200",
            dropout_vs_ensemble(200),
        ),
        "fig6" => (
            "SGD with weight decay over an alpha grid, N = 1000",
            weight_decay(1000),
        ),
        "fig6-desk" => (
            "SGD with weight decay over an alpha grid, N = 200",
            weight_decay(200),
        ),
        _ => return Err(ScmError::UnknownPreset(name.to_string())),
    };
    Ok(Preset {
        name: name.to_string(),
        description,
        runs,
    })
}
