//! C-MAPSS turbofan data: parsing and the preprocessing pipeline.
//!
//! The raw files hold whitespace-separated rows of
//! `unit cycle setting1..3 sensor1..21`. Preprocessing drops the seven
//! uninformative sensors, discovers operating modes with k-means on the
//! operational settings, min-max scales each retained sensor per mode using
//! training statistics, and labels cycles with the capped RUL
//! `min(rul_max, F - t)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{Error, Result};
use crate::kmeans::{fit_modes, KMeansParams, ModeModel};
use crate::{LabeledSample, TimeSeriesUnit, N_SENSORS, N_SETTINGS};

/// 1-based indices of the sensors removed before modelling.
pub const DEFAULT_DROPPED_SENSORS: [usize; 7] = [1, 5, 6, 10, 16, 18, 19];
pub const DEFAULT_RUL_MAX: u32 = 125;
const COLUMNS: usize = 2 + N_SETTINGS + N_SENSORS;

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub dataset_id: u8,
    pub train_units: Vec<TimeSeriesUnit>,
    pub test_units: Vec<TimeSeriesUnit>,
    /// True RUL at the last recorded cycle of each test unit.
    pub test_rul: Vec<u32>,
}

fn parse_error(source_name: &'static str, line: usize, message: String) -> Error {
    Error::Parse {
        source_name,
        line,
        message,
    }
}

type PendingUnit = (u32, Vec<[f64; N_SETTINGS]>, Vec<[f64; N_SENSORS]>);

/// Parses one trajectory file. Units are sorted by id and each is treated as
/// run-to-failure (`failure_time = T`).
pub fn parse_units(text: &str, source_name: &'static str) -> Result<Vec<TimeSeriesUnit>> {
    let mut units: Vec<TimeSeriesUnit> = Vec::new();
    let mut current: Option<PendingUnit> = None;
    let mut finish = |unit: Option<PendingUnit>| -> Result<()> {
        if let Some((id, settings, sensors)) = unit {
            if units.iter().any(|u| u.unit_id == id) {
                return Err(Error::InvalidUnit {
                    unit: id,
                    message: "rows are not contiguous".into(),
                });
            }
            let t = sensors.len() as u32;
            units.push(TimeSeriesUnit::new(id, settings, sensors, t)?);
        }
        Ok(())
    };
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != COLUMNS {
            return Err(parse_error(
                source_name,
                line_no,
                format!("expected {COLUMNS} columns, found {}", fields.len()),
            ));
        }
        let int = |s: &str, what: &str| -> Result<u32> {
            s.parse::<u32>()
                .ok()
                .or_else(|| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| *v >= 0.0 && *v == libm::trunc(*v))
                        .map(|v| v as u32)
                })
                .ok_or_else(|| parse_error(source_name, line_no, format!("invalid {what} `{s}`")))
        };
        let unit = int(fields[0], "unit id")?;
        let cycle = int(fields[1], "cycle")?;
        let mut values = [0.0; N_SETTINGS + N_SENSORS];
        for (v, s) in values.iter_mut().zip(&fields[2..]) {
            *v = s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    parse_error(source_name, line_no, format!("invalid number `{s}`"))
                })?;
        }
        let settings: [f64; N_SETTINGS] = values[..N_SETTINGS].try_into().unwrap();
        let sensors: [f64; N_SENSORS] = values[N_SETTINGS..].try_into().unwrap();
        if current.as_ref().is_none_or(|c| c.0 != unit) {
            finish(current.take())?;
            current = Some((unit, Vec::new(), Vec::new()));
        }
        let (_, s, z) = current.as_mut().unwrap();
        let expected = z.len() as u32 + 1;
        if cycle != expected {
            return Err(Error::NonContiguousCycles {
                unit,
                expected,
                found: cycle,
            });
        }
        s.push(settings);
        z.push(sensors);
    }
    finish(current)?;
    units.sort_by_key(|u| u.unit_id);
    Ok(units)
}

pub fn parse_rul(text: &str) -> Result<Vec<u32>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<u32>()
                .map_err(|_| parse_error("RUL file", i + 1, format!("invalid RUL `{}`", l.trim())))
        })
        .collect()
}

/// Parses the train, test and RUL files of one sub-dataset.
pub fn parse_cmapss(
    train_text: &str,
    test_text: &str,
    rul_text: &str,
    dataset_id: u8,
) -> Result<RawDataset> {
    if !(1..=4).contains(&dataset_id) {
        return Err(Error::InvalidConfig(format!(
            "dataset id {dataset_id} outside 1..=4"
        )));
    }
    let train_units = parse_units(train_text, "train file")?;
    let mut test_units = parse_units(test_text, "test file")?;
    let test_rul = parse_rul(rul_text)?;
    if test_rul.len() != test_units.len() {
        return Err(Error::RulCountMismatch {
            units: test_units.len(),
            rul: test_rul.len(),
        });
    }
    for (u, &rul) in test_units.iter_mut().zip(&test_rul) {
        u.failure_time = u.len() as u32 + rul;
    }
    Ok(RawDataset {
        dataset_id,
        train_units,
        test_units,
        test_rul,
    })
}

/// Writes units back in the raw whitespace-separated layout.
pub fn format_units(units: &[TimeSeriesUnit]) -> String {
    let mut out = String::new();
    for u in units {
        for (t, (s, z)) in u.settings.iter().zip(&u.sensors).enumerate() {
            let _ = write!(out, "{} {}", u.unit_id, t + 1);
            for v in s.iter().chain(z) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn format_rul(rul: &[u32]) -> String {
    let mut out = String::new();
    for r in rul {
        let _ = writeln!(out, "{r}");
    }
    out
}

/// Capped RUL label `min(rul_max, failure_time - t)`.
pub fn rectified_rul(failure_time: u32, t: u32, rul_max: u32) -> Result<u32> {
    if t == 0 || t > failure_time {
        return Err(Error::CycleOutOfRange { t, failure_time });
    }
    Ok((failure_time - t).min(rul_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// One sample per cycle: the retained sensor vector.
    Flat,
    /// One sample per cycle `t > L`: the flattened last `L` cycles.
    Windowed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// 1-based sensor indices to drop.
    pub dropped_sensors: Vec<usize>,
    pub rul_max: u32,
    pub window_length: Option<usize>,
    pub n_modes: usize,
    pub scale_range: (f64, f64),
    /// Seed for the operating-mode clustering.
    pub seed: u64,
}

impl PreprocessConfig {
    /// Defaults for sub-dataset `id`: six operating modes for 2 and 4, one
    /// otherwise; window lengths 30/20/30/15.
    pub fn for_dataset(id: u8) -> Result<Self> {
        let (n_modes, window) = match id {
            1 => (1, 30),
            2 => (6, 20),
            3 => (1, 30),
            4 => (6, 15),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "dataset id {id} outside 1..=4"
                )))
            }
        };
        Ok(Self {
            dropped_sensors: DEFAULT_DROPPED_SENSORS.to_vec(),
            rul_max: DEFAULT_RUL_MAX,
            window_length: Some(window),
            n_modes,
            scale_range: (-1.0, 1.0),
            seed: 0,
        })
    }

    /// 0-based indices of the sensors kept as features.
    pub fn retained_sensors(&self) -> Vec<usize> {
        (0..N_SENSORS)
            .filter(|i| !self.dropped_sensors.contains(&(i + 1)))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self
            .dropped_sensors
            .iter()
            .any(|&s| s == 0 || s > N_SENSORS)
        {
            return Err(Error::InvalidConfig(
                "dropped sensor index outside 1..=21".into(),
            ));
        }
        if self.retained_sensors().is_empty() || self.n_modes == 0 || self.rul_max == 0 {
            return Err(Error::InvalidConfig(
                "need a retained sensor, n_modes >= 1 and rul_max >= 1".into(),
            ));
        }
        if self.window_length == Some(0)
            || self.scale_range.0.partial_cmp(&self.scale_range.1)
                != Some(core::cmp::Ordering::Less)
        {
            return Err(Error::InvalidConfig(
                "window length must be positive and scale range increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Per-mode, per-sensor min-max scalers fit on training units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerSet {
    retained: Vec<usize>,
    range: (f64, f64),
    modes: ModeModel<N_SETTINGS>,
    /// `bounds[mode][j]` = (min, max) of retained sensor `j`; `None` when
    /// the mode never occurs in training.
    bounds: Vec<Option<Vec<(f64, f64)>>>,
}

impl ScalerSet {
    pub fn modes(&self) -> &ModeModel<N_SETTINGS> {
        &self.modes
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn bounds(&self, mode: usize) -> Option<&[(f64, f64)]> {
        self.bounds.get(mode)?.as_deref()
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    fn scale(&self, mode: usize, sensors: &[f64; N_SENSORS]) -> Result<Vec<f64>> {
        let bounds = self.bounds(mode).ok_or(Error::UnseenMode(mode))?;
        let (lo, hi) = self.range;
        Ok(self
            .retained
            .iter()
            .zip(bounds)
            .map(|(&s, &(min, max))| {
                if max > min {
                    lo + (hi - lo) * (sensors[s] - min) / (max - min)
                } else {
                    lo + (hi - lo) / 2.0
                }
            })
            .collect())
    }
}

pub fn fit_scalers(
    train_units: &[TimeSeriesUnit],
    modes: &ModeModel<N_SETTINGS>,
    config: &PreprocessConfig,
) -> Result<ScalerSet> {
    config.validate()?;
    if train_units.is_empty() {
        return Err(Error::Empty("training units"));
    }
    let retained = config.retained_sensors();
    let mut bounds: Vec<Option<Vec<(f64, f64)>>> = vec![None; modes.k()];
    for u in train_units {
        for (s, z) in u.settings.iter().zip(&u.sensors) {
            let b = bounds[modes.assign(s)]
                .get_or_insert_with(|| vec![(f64::INFINITY, f64::NEG_INFINITY); retained.len()]);
            for (slot, &j) in b.iter_mut().zip(&retained) {
                slot.0 = slot.0.min(z[j]);
                slot.1 = slot.1.max(z[j]);
            }
        }
    }
    Ok(ScalerSet {
        retained,
        range: config.scale_range,
        modes: modes.clone(),
        bounds,
    })
}

/// A unit after sensor selection and scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledUnit {
    pub unit_id: u32,
    pub failure_time: u32,
    /// One row of retained, scaled sensors per cycle.
    pub rows: Vec<Vec<f64>>,
}

impl ScaledUnit {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn apply_scaling(unit: &TimeSeriesUnit, scalers: &ScalerSet) -> Result<ScaledUnit> {
    let rows = unit
        .settings
        .iter()
        .zip(&unit.sensors)
        .map(|(s, z)| scalers.scale(scalers.modes.assign(s), z))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaledUnit {
        unit_id: unit.unit_id,
        failure_time: unit.failure_time,
        rows,
    })
}

/// One sample per (unit, cycle).
pub fn transform_flat(
    units: &[ScaledUnit],
    config: &PreprocessConfig,
) -> Result<Vec<LabeledSample>> {
    let mut out = Vec::with_capacity(units.iter().map(ScaledUnit::len).sum());
    for u in units {
        for (i, row) in u.rows.iter().enumerate() {
            let t = i as u32 + 1;
            let target = rectified_rul(u.failure_time, t, config.rul_max)?;
            out.push(LabeledSample::new(row.clone(), target as f64, u.unit_id, t));
        }
    }
    Ok(out)
}

fn window_length(config: &PreprocessConfig) -> Result<usize> {
    config
        .window_length
        .filter(|&l| l > 0)
        .ok_or_else(|| Error::InvalidConfig("windowed features need a window length".into()))
}

/// One sample per cycle `L < t <= T`: cycles `t-L+1..=t` flattened
/// row-major (oldest first).
pub fn transform_windowed(
    units: &[ScaledUnit],
    config: &PreprocessConfig,
) -> Result<Vec<LabeledSample>> {
    let l = window_length(config)?;
    let mut out = Vec::new();
    for u in units {
        for t in (l + 1)..=u.len() {
            let features: Vec<f64> = u.rows[t - l..t].iter().flatten().copied().collect();
            let target = rectified_rul(u.failure_time, t as u32, config.rul_max)?;
            out.push(LabeledSample::new(
                features,
                target as f64,
                u.unit_id,
                t as u32,
            ));
        }
    }
    Ok(out)
}

/// Exactly one sample per test unit, at its last recorded cycle. Windowed
/// features of units shorter than the window are left-padded with copies of
/// the first cycle.
pub fn test_points(
    units: &[ScaledUnit],
    config: &PreprocessConfig,
    mode: FeatureMode,
) -> Result<Vec<LabeledSample>> {
    units
        .iter()
        .map(|u| {
            let t = u.len();
            let features = match mode {
                FeatureMode::Flat => u.rows[t - 1].clone(),
                FeatureMode::Windowed => {
                    let l = window_length(config)?;
                    let pad = l.saturating_sub(t);
                    core::iter::repeat_n(&u.rows[0], pad)
                        .chain(&u.rows[t.saturating_sub(l)..])
                        .flatten()
                        .copied()
                        .collect()
                }
            };
            let target = rectified_rul(u.failure_time, t as u32, config.rul_max)?;
            Ok(LabeledSample::new(
                features,
                target as f64,
                u.unit_id,
                t as u32,
            ))
        })
        .collect()
}

/// A dataset with scalers fit and every unit scaled.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: PreprocessConfig,
    pub scalers: ScalerSet,
    pub train: Vec<ScaledUnit>,
    pub test: Vec<ScaledUnit>,
}

impl Prepared {
    pub fn training_samples(&self, mode: FeatureMode) -> Result<Vec<LabeledSample>> {
        match mode {
            FeatureMode::Flat => transform_flat(&self.train, &self.config),
            FeatureMode::Windowed => transform_windowed(&self.train, &self.config),
        }
    }

    pub fn test_samples(&self, mode: FeatureMode) -> Result<Vec<LabeledSample>> {
        test_points(&self.test, &self.config, mode)
    }
}

/// Runs the full pipeline. Operating modes are clustered on the pooled
/// settings of training and test units; scalers see training units only.
pub fn prepare(raw: &RawDataset, config: &PreprocessConfig) -> Result<Prepared> {
    config.validate()?;
    let settings: Vec<[f64; N_SETTINGS]> = raw
        .train_units
        .iter()
        .chain(&raw.test_units)
        .flat_map(|u| u.settings.iter().copied())
        .collect();
    let modes = fit_modes(
        &settings,
        config.n_modes,
        config.seed,
        KMeansParams::default(),
    )?;
    let scalers = fit_scalers(&raw.train_units, &modes, config)?;
    let scale_all = |units: &[TimeSeriesUnit]| {
        units
            .iter()
            .map(|u| apply_scaling(u, &scalers))
            .collect::<Result<Vec<_>>>()
    };
    let train = scale_all(&raw.train_units)?;
    let test = scale_all(&raw.test_units)?;
    Ok(Prepared {
        config: config.clone(),
        scalers,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn row(unit: u32, cycle: u32, base: f64) -> String {
        let mut s = format!("{unit} {cycle} 0.0 0.0 100.0");
        for j in 0..N_SENSORS {
            let _ = write!(s, " {}", base + j as f64);
        }
        s
    }

    fn toy_units(lengths: &[usize]) -> Vec<TimeSeriesUnit> {
        lengths
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let sensors = (0..t)
                    .map(|c| core::array::from_fn(|j| (c * (j + 1)) as f64))
                    .collect();
                TimeSeriesUnit::new(i as u32 + 1, vec![[0.0, 0.0, 100.0]; t], sensors, t as u32)
                    .unwrap()
            })
            .collect()
    }

    fn scaled(lengths: &[usize]) -> (Vec<ScaledUnit>, PreprocessConfig) {
        let config = PreprocessConfig::for_dataset(1).unwrap();
        let units = toy_units(lengths);
        let modes = fit_modes(&[[0.0, 0.0, 100.0]], 1, 0, KMeansParams::default()).unwrap();
        let scalers = fit_scalers(&units, &modes, &config).unwrap();
        (
            units
                .iter()
                .map(|u| apply_scaling(u, &scalers).unwrap())
                .collect(),
            config,
        )
    }

    #[test]
    fn parses_a_two_row_unit() {
        let text = [row(1, 1, 0.5), row(1, 2, 0.7)].join("\n");
        let units = parse_units(&text, "train file").unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].len(), 2);
        assert_eq!(units[0].failure_time, 2);
        assert_eq!(units[0].sensors[1][3], 3.7);
    }

    #[test]
    fn parse_errors() {
        let gap = [row(1, 1, 0.0), row(1, 3, 0.0)].join("\n");
        assert_eq!(
            parse_units(&gap, "train file"),
            Err(Error::NonContiguousCycles {
                unit: 1,
                expected: 2,
                found: 3
            })
        );
        let short = "1 1 0.0 0.0";
        assert!(matches!(
            parse_units(short, "train file"),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = row(1, 1, 0.0).replace("100.0", "abc");
        assert!(matches!(
            parse_units(&bad, "train file"),
            Err(Error::Parse { .. })
        ));
        let split = [row(1, 1, 0.0), row(2, 1, 0.0), row(1, 2, 0.0)].join("\n");
        assert!(matches!(
            parse_units(&split, "train file"),
            Err(Error::NonContiguousCycles { .. } | Error::InvalidUnit { .. })
        ));
        let train = row(1, 1, 0.0);
        assert_eq!(
            parse_cmapss(&train, &train, "5\n6\n", 1),
            Err(Error::RulCountMismatch { units: 1, rul: 2 })
        );
        assert!(parse_cmapss(&train, &train, "5\n", 7).is_err());
    }

    #[test]
    fn test_failure_time_adds_rul() {
        let text = [row(3, 1, 0.0), row(3, 2, 0.0), row(3, 3, 0.0)].join("\n");
        let raw = parse_cmapss(&text, &text, "  40 \n", 1).unwrap();
        assert_eq!(raw.train_units[0].failure_time, 3);
        assert_eq!(raw.test_units[0].failure_time, 43);
    }

    #[test]
    fn round_trip() {
        let units = toy_units(&[3, 5]);
        let again = parse_units(&format_units(&units), "train file").unwrap();
        assert_eq!(again, units);
        assert_eq!(
            parse_rul(&format_rul(&[1, 20, 300])).unwrap(),
            vec![1, 20, 300]
        );
    }

    #[test]
    fn rectified_labels() {
        assert_eq!(rectified_rul(200, 50, 125), Ok(125));
        assert_eq!(rectified_rul(200, 150, 125), Ok(50));
        assert_eq!(rectified_rul(200, 200, 125), Ok(0));
        assert!(rectified_rul(200, 201, 125).is_err());
        assert!(rectified_rul(200, 0, 125).is_err());
    }

    #[test]
    fn default_configs() {
        let c = PreprocessConfig::for_dataset(1).unwrap();
        assert_eq!(
            c.retained_sensors(),
            vec![1, 2, 3, 6, 7, 8, 10, 11, 12, 13, 14, 16, 19, 20]
        );
        assert_eq!(
            (c.n_modes, c.window_length, c.rul_max, c.scale_range),
            (1, Some(30), 125, (-1.0, 1.0))
        );
        let windows: Vec<Option<usize>> = (1..=4)
            .map(|i| PreprocessConfig::for_dataset(i).unwrap().window_length)
            .collect();
        assert_eq!(windows, vec![Some(30), Some(20), Some(30), Some(15)]);
        assert_eq!(PreprocessConfig::for_dataset(4).unwrap().n_modes, 6);
        assert!(PreprocessConfig::for_dataset(0).is_err());
    }

    #[test]
    fn min_max_endpoints_and_midpoint() {
        let (units, _) = scaled(&[4, 6]);
        // Retained sensor 0 (raw index 1) takes values 2c; min 0, max 10.
        let first: Vec<f64> = units
            .iter()
            .flat_map(|u| u.rows.iter().map(|r| r[0]))
            .collect();
        assert_eq!(first.iter().cloned().fold(f64::INFINITY, f64::min), -1.0);
        assert_eq!(first.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        assert_eq!(units[1].rows[5][0], 1.0);

        let constant =
            vec![TimeSeriesUnit::new(1, vec![[0.0; 3]; 3], vec![[7.0; N_SENSORS]; 3], 3).unwrap()];
        let config = PreprocessConfig::for_dataset(1).unwrap();
        let modes = ModeModel::from_centroids(vec![[0.0; 3]]);
        let s = fit_scalers(&constant, &modes, &config).unwrap();
        let u = apply_scaling(&constant[0], &s).unwrap();
        assert!(u.rows.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn unseen_mode_is_an_error() {
        let units = toy_units(&[3]);
        let config = PreprocessConfig::for_dataset(1).unwrap();
        let modes = ModeModel::from_centroids(vec![[0.0, 0.0, 100.0], [50.0, 50.0, 50.0]]);
        let s = fit_scalers(&units, &modes, &config).unwrap();
        let mut other = units[0].clone();
        other.settings[1] = [49.0, 49.0, 49.0];
        assert_eq!(apply_scaling(&other, &s), Err(Error::UnseenMode(1)));
    }

    #[test]
    fn flat_samples() {
        let (units, config) = scaled(&[5]);
        let samples = transform_flat(&units, &config).unwrap();
        assert_eq!(samples.len(), 5);
        assert!(samples.iter().all(|s| s.features.len() == 14));
        assert_eq!(samples.last().unwrap().target, 0.0);
        assert_eq!(samples[0].target, 4.0);
    }

    #[test]
    fn window_counts() {
        let (units, config) = scaled(&[35, 30, 31]);
        let samples = transform_windowed(&units, &config).unwrap();
        // 35 - 30, 30 - 30 and 31 - 30 windows.
        assert_eq!(samples.len(), 6);
        assert!(samples.iter().all(|s| s.features.len() == 30 * 14));
        // The newest cycle sits at the end of the window.
        let s = &samples[0];
        assert_eq!(s.cycle_index, 31);
        assert_eq!(&s.features[29 * 14..], units[0].rows[30].as_slice());
        assert_eq!(&s.features[..14], units[0].rows[1].as_slice());
    }

    #[test]
    fn last_cycle_test_points() {
        let (mut units, config) = scaled(&[10, 40]);
        units[0].failure_time = 10 + 130;
        units[1].failure_time = 40 + 20;
        let flat = test_points(&units, &config, FeatureMode::Flat).unwrap();
        assert_eq!(flat.len(), 2);
        assert_eq!((flat[0].target, flat[1].target), (125.0, 20.0));
        assert_eq!((flat[0].cycle_index, flat[1].cycle_index), (10, 40));
        let windowed = test_points(&units, &config, FeatureMode::Windowed).unwrap();
        assert!(windowed.iter().all(|s| s.features.len() == 420));
        // 20 copies of the first cycle, then all 10 recorded cycles.
        assert_eq!(
            &windowed[0].features[19 * 14..20 * 14],
            units[0].rows[0].as_slice()
        );
        assert_eq!(
            &windowed[0].features[20 * 14..21 * 14],
            units[0].rows[0].as_slice()
        );
        assert_eq!(
            &windowed[0].features[29 * 14..],
            units[0].rows[9].as_slice()
        );
        assert_eq!(&windowed[1].features[..14], units[1].rows[10].as_slice());
    }

    #[test]
    fn prepare_pipeline() {
        let train = toy_units(&[40, 50]);
        let test = toy_units(&[12]);
        let raw = RawDataset {
            dataset_id: 1,
            train_units: train,
            test_units: test,
            test_rul: vec![7],
        };
        let mut raw = raw;
        raw.test_units[0].failure_time = 19;
        let p = prepare(&raw, &PreprocessConfig::for_dataset(1).unwrap()).unwrap();
        assert_eq!(p.scalers.modes().k(), 1);
        assert_eq!(p.training_samples(FeatureMode::Flat).unwrap().len(), 90);
        assert_eq!(
            p.training_samples(FeatureMode::Windowed).unwrap().len(),
            10 + 20
        );
        assert_eq!(p.test_samples(FeatureMode::Flat).unwrap()[0].target, 7.0);
        assert_eq!(p.config.rul_max.to_string(), "125");
    }
}
