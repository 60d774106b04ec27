//! File formats: raw C-MAPSS text files, sample and result CSVs, the
//! preprocessing manifest, and atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rulcp_core::cmapss::{parse_cmapss, Prepared, RawDataset};
use rulcp_core::eval::{CellSummary, RunRecord};
use rulcp_core::LabeledSample;

use crate::error::{CliError, Result};

pub fn train_file(dir: &Path, id: u8) -> PathBuf {
    dir.join(format!("train_FD00{id}.txt"))
}

pub fn test_file(dir: &Path, id: u8) -> PathBuf {
    dir.join(format!("test_FD00{id}.txt"))
}

pub fn rul_file(dir: &Path, id: u8) -> PathBuf {
    dir.join(format!("RUL_FD00{id}.txt"))
}

/// True when all three files of sub-dataset `id` exist in `dir`.
pub fn has_dataset(dir: &Path, id: u8) -> bool {
    [train_file(dir, id), test_file(dir, id), rul_file(dir, id)]
        .iter()
        .all(|p| p.is_file())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::ReadInput {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads `train_FD00x.txt`, `test_FD00x.txt` and `RUL_FD00x.txt`.
pub fn read_raw(dir: &Path, id: u8) -> Result<RawDataset> {
    let train = read_text(&train_file(dir, id))?;
    let test = read_text(&test_file(dir, id))?;
    let rul = read_text(&rul_file(dir, id))?;
    parse_cmapss(&train, &test, &rul, id).map_err(|source| CliError::Malformed {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Header `unit_id,cycle,target,f_0,...`.
pub fn samples_csv(samples: &[LabeledSample]) -> Vec<u8> {
    let width = samples.first().map_or(0, |s| s.features.len());
    let mut header = strings(&["unit_id", "cycle", "target"]);
    header.extend((0..width).map(|j| format!("f_{j}")));
    csv_bytes(
        &header,
        samples.iter().map(|s| {
            let mut row = vec![
                s.unit_id.to_string(),
                s.cycle_index.to_string(),
                s.target.to_string(),
            ];
            row.extend(s.features.iter().map(f64::to_string));
            row
        }),
    )
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<LabeledSample>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for record in reader.deserialize::<(u32, u32, f64, Vec<f64>)>() {
        let (unit_id, cycle, target, features) = record.map_err(csv_err)?;
        out.push(LabeledSample::new(features, target, unit_id, cycle));
    }
    Ok(out)
}

/// `key = value` lines describing a preprocessing run.
pub fn manifest(prepared: &Prepared, dataset_id: u8, sample_counts: &[(&str, usize)]) -> String {
    let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
    let c = &prepared.config;
    let mut m = String::new();
    let _ = writeln!(m, "dataset = FD00{dataset_id}");
    let _ = writeln!(m, "rul_max = {}", c.rul_max);
    let _ = writeln!(
        m,
        "dropped_sensors = {}",
        join(&mut c.dropped_sensors.iter().map(|s| s.to_string()))
    );
    let _ = writeln!(
        m,
        "retained_sensors = {}",
        join(&mut c.retained_sensors().iter().map(|s| (s + 1).to_string()))
    );
    let _ = writeln!(
        m,
        "window_length = {}",
        c.window_length.map_or("none".into(), |w| w.to_string())
    );
    let _ = writeln!(m, "scale_range = {},{}", c.scale_range.0, c.scale_range.1);
    let _ = writeln!(m, "cluster_seed = {}", c.seed);
    let _ = writeln!(m, "train_units = {}", prepared.train.len());
    let _ = writeln!(m, "test_units = {}", prepared.test.len());
    for (name, n) in sample_counts {
        let _ = writeln!(m, "{name}_samples = {n}");
    }
    let modes = prepared.scalers.modes();
    let _ = writeln!(m, "n_modes = {}", modes.k());
    for (i, centroid) in modes.centroids().iter().enumerate() {
        let _ = writeln!(
            m,
            "centroid.{i} = {}",
            join(&mut centroid.iter().map(f64::to_string))
        );
    }
    for mode in 0..modes.k() {
        let Some(bounds) = prepared.scalers.bounds(mode) else {
            let _ = writeln!(m, "scaler.{mode} = unseen");
            continue;
        };
        for (&sensor, (lo, hi)) in prepared.scalers.retained().iter().zip(bounds) {
            let _ = writeln!(m, "scaler.{mode}.sensor_{} = {lo},{hi}", sensor + 1);
        }
    }
    m
}

/// Columns `dataset,framework,alpha,seed,coverage,mean_width,n_unbounded`.
pub fn results_csv(records: &[RunRecord]) -> Vec<u8> {
    csv_bytes(
        &strings(&[
            "dataset",
            "framework",
            "alpha",
            "seed",
            "coverage",
            "mean_width",
            "n_unbounded",
        ]),
        records.iter().map(|r| {
            vec![
                r.dataset.clone(),
                r.framework.to_string(),
                r.alpha.to_string(),
                r.seed.to_string(),
                r.stats.coverage.to_string(),
                r.stats.mean_width.to_string(),
                r.stats.n_unbounded.to_string(),
            ]
        }),
    )
}

/// One row per (run, test point).
pub fn intervals_csv(records: &[RunRecord]) -> Vec<u8> {
    csv_bytes(
        &strings(&[
            "dataset",
            "framework",
            "alpha",
            "seed",
            "unit_id",
            "cycle",
            "y_true",
            "y_hat",
            "lower",
            "upper",
        ]),
        records.iter().flat_map(|r| {
            r.intervals.iter().map(move |iv| {
                vec![
                    r.dataset.clone(),
                    r.framework.to_string(),
                    r.alpha.to_string(),
                    r.seed.to_string(),
                    iv.unit_id.to_string(),
                    iv.cycle_index.to_string(),
                    iv.y_true.to_string(),
                    iv.y_hat.to_string(),
                    iv.lower.to_string(),
                    iv.upper.to_string(),
                ]
            })
        }),
    )
}

/// Plot data in the layout of a sorted-RUL figure: for each (framework,
/// alpha) of the first seed, test units ordered by ascending true RUL.
pub fn sorted_rul_csv(records: &[RunRecord]) -> Vec<u8> {
    let first_seed = records.iter().map(|r| r.seed).min();
    let rows = records
        .iter()
        .filter(|r| Some(r.seed) == first_seed)
        .flat_map(|r| {
            let mut ivs = r.intervals.clone();
            ivs.sort_by(|a, b| {
                a.y_true
                    .total_cmp(&b.y_true)
                    .then(a.unit_id.cmp(&b.unit_id))
            });
            ivs.into_iter().enumerate().map(move |(rank, iv)| {
                vec![
                    r.dataset.clone(),
                    r.framework.to_string(),
                    r.alpha.to_string(),
                    r.seed.to_string(),
                    rank.to_string(),
                    iv.unit_id.to_string(),
                    iv.y_true.to_string(),
                    iv.y_hat.to_string(),
                    iv.lower.to_string(),
                    iv.upper.to_string(),
                ]
            })
        });
    csv_bytes(
        &strings(&[
            "dataset",
            "framework",
            "alpha",
            "seed",
            "rank",
            "unit_id",
            "y_true",
            "y_hat",
            "lower",
            "upper",
        ]),
        rows,
    )
}

/// Fixed-width table for stdout.
pub fn summary_table(cells: &[CellSummary]) -> String {
    let mut out = format!(
        "{:<10} {:<12} {:>6} {:>6} {:>10} {:>12} {:>10}\n",
        "dataset", "framework", "alpha", "runs", "coverage", "mean_width", "unbounded"
    );
    for c in cells {
        let _ = writeln!(
            out,
            "{:<10} {:<12} {:>6.2} {:>6} {:>10.4} {:>12.4} {:>10}",
            c.dataset,
            c.framework.name(),
            c.alpha,
            c.n_runs,
            c.mean_coverage,
            c.mean_width,
            c.total_unbounded
        );
    }
    out
}
