//! The three subcommands, minus argument parsing.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rulcp_core::checks::{run_all, CheckOutcome, ValidateOptions};
use rulcp_core::cmapss::{prepare as preprocess, FeatureMode, PreprocessConfig};
use rulcp_core::eval::{
    run_seed, sort_records, summarize, synth_generate, CellSummary, ExperimentData, RunRecord,
};

use crate::config::{DataSource, RunPlan};
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Clone)]
pub struct PrepareOutput {
    pub files: Vec<PathBuf>,
    pub manifest: String,
}

/// Writes `FD00x_{train,test}_{flat,windowed}.csv` and `FD00x_manifest.txt`.
pub fn prepare(
    dataset_id: u8,
    data_dir: &Path,
    out_dir: &Path,
    seed: u64,
) -> Result<PrepareOutput> {
    let raw = io::read_raw(data_dir, dataset_id)?;
    let config = PreprocessConfig {
        seed,
        ..PreprocessConfig::for_dataset(dataset_id).map_err(|e| CliError::Config(e.to_string()))?
    };
    let prepared = preprocess(&raw, &config)?;
    let mut outputs = Vec::new();
    let mut counts = Vec::new();
    for (mode, tag) in [
        (FeatureMode::Flat, "flat"),
        (FeatureMode::Windowed, "windowed"),
    ] {
        let train = prepared.training_samples(mode)?;
        let test = prepared.test_samples(mode)?;
        counts.push((format!("train_{tag}"), train.len()));
        counts.push((format!("test_{tag}"), test.len()));
        outputs.push((
            format!("FD00{dataset_id}_train_{tag}.csv"),
            io::samples_csv(&train),
        ));
        outputs.push((
            format!("FD00{dataset_id}_test_{tag}.csv"),
            io::samples_csv(&test),
        ));
    }
    let counts: Vec<(&str, usize)> = counts.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let manifest = io::manifest(&prepared, dataset_id, &counts);
    outputs.push((
        format!("FD00{dataset_id}_manifest.txt"),
        manifest.clone().into_bytes(),
    ));
    let mut files = Vec::new();
    for (name, bytes) in outputs {
        let path = out_dir.join(name);
        io::write_atomic(&path, &bytes)?;
        files.push(path);
    }
    Ok(PrepareOutput { files, manifest })
}

pub fn load_data(source: &DataSource, prep_seed: u64) -> Result<ExperimentData> {
    match source {
        DataSource::Cmapss {
            dataset_id,
            data_dir,
            features,
        } => {
            let raw = io::read_raw(data_dir, *dataset_id)?;
            let config = PreprocessConfig {
                seed: prep_seed,
                ..PreprocessConfig::for_dataset(*dataset_id)
                    .map_err(|e| CliError::Config(e.to_string()))?
            };
            let prepared = preprocess(&raw, &config)?;
            Ok(ExperimentData::from_prepared(
                source.name(),
                &prepared,
                *features,
            )?)
        }
        DataSource::Synthetic {
            n_train,
            n_test,
            noise,
            seed,
        } => {
            let split = synth_generate(*n_train, 0, *n_test, *noise, *seed);
            Ok(ExperimentData::from_samples(
                source.name(),
                split.train,
                split.test,
            ))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub summary: Vec<CellSummary>,
    pub files: Vec<PathBuf>,
}

/// Runs every seed in parallel, then writes `results.csv`, `intervals.csv`
/// and `sorted_rul.csv` into the plan's output directory.
pub fn run(plan: &RunPlan, progress: &(dyn Fn(&str) + Sync)) -> Result<RunOutput> {
    let data = load_data(&plan.source, plan.prep_seed)?;
    progress(&format!(
        "{}: {} training units, {} test points, {} seeds",
        data.name,
        data.train_groups.len(),
        data.test.len(),
        plan.seeds.len()
    ));
    let per_seed = plan
        .seeds
        .par_iter()
        .map(|&seed| {
            let records = run_seed(&data, &plan.experiment, seed);
            progress(&format!("seed {seed} done"));
            records
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut records: Vec<RunRecord> = per_seed.into_iter().flatten().collect();
    sort_records(&mut records);
    let outputs = [
        ("results.csv", io::results_csv(&records)),
        ("intervals.csv", io::intervals_csv(&records)),
        ("sorted_rul.csv", io::sorted_rul_csv(&records)),
    ];
    let mut files = Vec::new();
    for (name, bytes) in outputs {
        let path = plan.out_dir.join(name);
        io::write_atomic(&path, &bytes)?;
        files.push(path);
    }
    Ok(RunOutput {
        summary: summarize(&records),
        records,
        files,
    })
}

pub fn validate(options: &ValidateOptions) -> Vec<CheckOutcome> {
    run_all(options)
}

pub fn format_outcome(outcome: &CheckOutcome) -> String {
    let verdict = if outcome.passed { "PASS" } else { "FAIL" };
    format!("{verdict}  {:<36} {}", outcome.name, outcome.detail)
}
