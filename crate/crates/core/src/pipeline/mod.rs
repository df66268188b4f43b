//! Files on disk: dataset layout, synthetic data, experiment config, the run
//! itself and the result tables.

mod config;
mod dataset;
mod kv;
mod report;
mod run;
mod synth;

use std::path::Path;

pub use config::ExperimentConfig;
pub use dataset::{
    channel_text, channel_units, load_dataset, parse_channel, parse_exclusions, parse_ratings, validate_dataset,
    write_dataset, EXCLUSIONS_FILE, RATINGS_FILE,
};
pub use report::{
    best_setups, correlation_table, emit_tables, f1_matrix, parse_subject_results, results_full, results_table,
    setup_id, subject_results, summarize, write_run, SetupSummary, SUBJECT_RESULTS,
};
pub use run::{dataset_fingerprint, run_trials, Method, RunOutput, Score, ScoreRow, SelectionTally};
pub use synth::{
    generate_synthetic_dataset, synth_trial, write_ground_truth, LabelEffect, Physio, SynthSpec, SyntheticDataset,
    TrialParams, TrialTruth, BREATH_LIMITS_PER_MIN, HR_LIMITS_BPM,
};

use crate::error::{Error, Result};

/// Loads the configured dataset, runs it and writes every output file into
/// `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let root = cfg
        .dataset_path
        .as_deref()
        .ok_or_else(|| Error::Config("dataset.path is not set".into()))?;
    let trials = load_dataset(root, cfg.flavor)?;
    let mut out = run_trials(trials, cfg)?;
    out.manifest.push(("dataset_path".into(), root.display().to_string()));
    write_outputs(&out, cfg, &cfg.out_dir)?;
    Ok(out)
}

pub fn write_outputs(out: &RunOutput, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_run(out, &cfg.resolved(), &cfg.dimensions, cfg.sidedness, &cfg.correlation_classifiers, dir)
}

/// Re-emits the tables of a finished run from its stored per-subject rows.
pub fn report_from_dir(dir: &Path) -> Result<()> {
    let cfg_path = dir.join("config.resolved");
    let cfg = ExperimentConfig::load(&cfg_path, None)?;
    let path = dir.join(SUBJECT_RESULTS);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let rows = parse_subject_results(&text, &path)?;
    emit_tables(&rows, &cfg.dimensions, cfg.sidedness, &cfg.correlation_classifiers, dir)
}
