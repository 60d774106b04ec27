//! Split-conformal prediction intervals for remaining-useful-lifetime (RUL)
//! regression.
//!
//! The crate turns any single-point regressor into an interval predictor with
//! one of five calibration frameworks ([`conformal::Framework`]): plain split
//! conformal, split conformal with a normalized non-conformity measure,
//! conformalized quantile regression, and the two weighted (non-exchangeable)
//! variants. It also ships the tree-ensemble base learners used in the
//! experiments, the C-MAPSS preprocessing pipeline and the experiment harness.
//!
//! Everything here is `no_std` + `alloc`; file IO, the CLI and parallel seed
//! execution live in the companion `rulcp` crate.
//!
//! ```
//! use std::sync::Arc;
//! use rulcp_core::conformal::calibrate_scp;
//! use rulcp_core::models::{fit, RegressorSpec};
//! use rulcp_core::LabeledSample;
//!
//! let data: Vec<LabeledSample> = (0..40)
//!     .map(|i| LabeledSample::new(vec![i as f64], (2 * i) as f64, i, 1))
//!     .collect();
//! let model = fit(&RegressorSpec::knn(1), &data[..30]).unwrap();
//! let predictor = calibrate_scp(Arc::new(model), &data[30..], 0.1).unwrap();
//! let interval = predictor.predict_interval(&[35.0], None).unwrap();
//! assert!(interval.lower <= 70.0 && 70.0 <= interval.upper);
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod checks;
pub mod cmapss;
pub mod conformal;
mod error;
pub mod eval;
pub mod kmeans;
pub mod models;
pub mod quantile;
mod types;

pub use error::{Error, Result};
pub use types::{LabeledSample, PredictionInterval, TimeSeriesUnit, N_SENSORS, N_SETTINGS};
