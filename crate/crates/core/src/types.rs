use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Operational settings recorded per cycle.
pub const N_SETTINGS: usize = 3;
/// Raw sensor channels recorded per cycle.
pub const N_SENSORS: usize = 21;

/// One engine's multivariate trajectory and its failure time.
///
/// Training units are run-to-failure (`failure_time == len()`); test units
/// stop early, so `failure_time` is the last cycle plus the true RUL.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesUnit {
    pub unit_id: u32,
    pub settings: Vec<[f64; N_SETTINGS]>,
    pub sensors: Vec<[f64; N_SENSORS]>,
    pub failure_time: u32,
}

impl TimeSeriesUnit {
    pub fn new(
        unit_id: u32,
        settings: Vec<[f64; N_SETTINGS]>,
        sensors: Vec<[f64; N_SENSORS]>,
        failure_time: u32,
    ) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::InvalidUnit {
                unit: unit_id,
                message: "no cycles".into(),
            });
        }
        if settings.len() != sensors.len() {
            return Err(Error::InvalidUnit {
                unit: unit_id,
                message: format!(
                    "{} settings rows but {} sensor rows",
                    settings.len(),
                    sensors.len()
                ),
            });
        }
        if (failure_time as usize) < sensors.len() {
            return Err(Error::InvalidUnit {
                unit: unit_id,
                message: format!(
                    "failure time {failure_time} precedes last cycle {}",
                    sensors.len()
                ),
            });
        }
        Ok(Self {
            unit_id,
            settings,
            sensors,
            failure_time,
        })
    }

    /// Number of recorded cycles `T_i`.
    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}

/// A feature vector with its RUL target.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub target: f64,
    pub unit_id: u32,
    /// 1-based cycle within the originating unit.
    pub cycle_index: u32,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, target: f64, unit_id: u32, cycle_index: u32) -> Self {
        Self {
            features,
            target,
            unit_id,
            cycle_index,
        }
    }
}

/// A prediction interval for one query point.
///
/// `lower`/`upper` are the emitted bounds, intersected with the nonnegative
/// half-line. `raw_lower`/`raw_upper` keep the unclamped arithmetic and
/// `width` is the analytic width of the unclamped interval (for example `2q`
/// for plain split conformal), which is what width statistics report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub raw_lower: f64,
    pub raw_upper: f64,
    /// Single-point estimate the interval was built around.
    pub point: f64,
    pub width: f64,
}

impl PredictionInterval {
    pub(crate) fn from_raw(
        raw_lower: f64,
        raw_upper: f64,
        point: f64,
        width: f64,
        alpha: f64,
    ) -> Self {
        let (raw_lower, raw_upper, width) = if raw_lower > raw_upper {
            // Over-shrunk quantile band: collapse onto its midpoint.
            let mid = 0.5 * (raw_lower + raw_upper);
            (mid, mid, 0.0)
        } else {
            (raw_lower, raw_upper, width)
        };
        Self {
            lower: raw_lower.max(0.0),
            upper: raw_upper.max(0.0),
            alpha,
            raw_lower,
            raw_upper,
            point,
            width,
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }
}
