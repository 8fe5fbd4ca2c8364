//! Command-line frontend.
//!
//! ```text
//! scm run --config <path> [--seed <u64>] [--out <dir>] [--threads <n>]
//! scm preset <name> [--print] [--seed <u64>] [--out <dir>] [--threads <n>]
//! scm list-presets
//! ```
//!
//! No environment variables are consulted. For an experiment set with
//! labels, each arm is written to `<stem>-<label>.csv`; a single unlabelled
//! experiment goes to `<stem>.csv`. All arms share one `<stem>.svg`.

pub mod config_text;
pub mod csv;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Result, ScmError};
use crate::harness::{
    preset, run_experiment_with_threads, ExperimentResult, LabeledConfig, PRESET_NAMES,
};
use svg::PlotSeries;

#[derive(Debug, Parser)]
#[command(
    name = "scm",
    version,
    about = "Teacher-student learning curves for soft committee machines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment(s) described in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Run, or print the config of, a named preset.
    Preset {
        name: String,
        /// Print the preset's config text instead of running it.
        #[arg(long)]
        print: bool,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// List the available presets.
    ListPresets,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunOptions {
    /// Replace the seed of every experiment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for running trials in parallel.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

/// Files written by one invocation.
#[derive(Debug, Default)]
pub struct Outputs {
    pub csv: Vec<PathBuf>,
    pub svg: PathBuf,
}

fn apply_seed(runs: &mut [LabeledConfig], seed: Option<u64>) {
    if let Some(seed) = seed {
        for r in runs {
            r.config.seed = seed;
        }
    }
}

/// Series plotted for a set of results: test error of each arm, plus
/// learning error for arms that ask for it.
pub fn plot_series(stem: &str, results: &[(LabeledConfig, ExperimentResult)]) -> Vec<PlotSeries> {
    let mut series = Vec::new();
    for (run, result) in results {
        let label = if run.label.is_empty() {
            stem
        } else {
            run.label.as_str()
        };
        let pts = |f: fn(&crate::metrics::ErrorPoint) -> f64| {
            result
                .mean
                .points
                .iter()
                .map(|p| (p.t_time, f(p)))
                .collect::<Vec<_>>()
        };
        if run.config.plot_learn {
            series.push(PlotSeries {
                label: format!("{label} test"),
                points: pts(|p| p.mse_test),
            });
            series.push(PlotSeries {
                label: format!("{label} learn"),
                points: pts(|p| p.mse_learn),
            });
        } else {
            series.push(PlotSeries {
                label: label.to_string(),
                points: pts(|p| p.mse_test),
            });
        }
    }
    series
}

/// Runs every arm and writes CSV and SVG files named after `stem` into `out`.
pub fn execute(stem: &str, runs: &[LabeledConfig], out: &Path, threads: usize) -> Result<Outputs> {
    std::fs::create_dir_all(out).map_err(|e| ScmError::io(out, e))?;
    let mut results = Vec::with_capacity(runs.len());
    let mut outputs = Outputs::default();
    for run in runs {
        let result = run_experiment_with_threads(&run.config, threads)?;
        let name = if run.label.is_empty() {
            format!("{stem}.csv")
        } else {
            format!("{stem}-{}.csv", run.label)
        };
        let path = out.join(name);
        csv::emit_csv(&result, &path)?;
        outputs.csv.push(path);
        results.push((run.clone(), result));
    }
    outputs.svg = out.join(format!("{stem}.svg"));
    svg::emit_svg_plot(&plot_series(stem, &results), stem, &outputs.svg)?;
    Ok(outputs)
}

/// Dispatches a parsed command line; the returned text goes to stdout.
pub fn dispatch(cli: Cli) -> Result<String> {
    match cli.command {
        Command::ListPresets => {
            let mut text = String::new();
            for name in PRESET_NAMES {
                let p = preset(name)?;
                text.push_str(&format!("{name:<10} {}\n", p.description));
            }
            Ok(text)
        }
        Command::Preset { name, print, opts } => {
            let mut runs = preset(&name)?.runs;
            apply_seed(&mut runs, opts.seed);
            if print {
                return Ok(config_text::render_set(&runs));
            }
            report(execute(&name, &runs, &opts.out, opts.threads)?)
        }
        Command::Run { config, opts } => {
            let text = std::fs::read_to_string(&config).map_err(|e| ScmError::io(&config, e))?;
            let mut runs = config_text::parse_config_set(&text)?;
            apply_seed(&mut runs, opts.seed);
            let stem = config
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("experiment")
                .to_string();
            report(execute(&stem, &runs, &opts.out, opts.threads)?)
        }
    }
}

fn report(outputs: Outputs) -> Result<String> {
    let mut text = String::new();
    for p in outputs.csv.iter().chain(std::iter::once(&outputs.svg)) {
        text.push_str(&format!("wrote {}\n", p.display()));
    }
    Ok(text)
}
