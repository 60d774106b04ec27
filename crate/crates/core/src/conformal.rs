//! The five calibration frameworks.
//!
//! | framework     | score on calibration point                  | interval at `x`                      |
//! |---------------|---------------------------------------------|--------------------------------------|
//! | `scp`         | `|y - M(x)|`                                | `M(x) -/+ q`                         |
//! | `scp_nnm`     | `|y - M(x)| / sigma(x)`                     | `M(x) -/+ q * sigma(x)`              |
//! | `cqr`         | `max(Q_lo(x) - y, y - Q_hi(x))`             | `[Q_lo(x) - q, Q_hi(x) + q]`         |
//! | `nex_scp`     | as `scp`, weighted per query                | `M(x) -/+ q(x)`                      |
//! | `nex_scp_nnm` | as `scp_nnm`, weighted per query            | `M(x) -/+ q(x) * sigma(x)`           |
//!
//! Weighted variants use `w_j = decay^|t(x) - t_j|` where `t` is the cycle
//! index within the originating unit, so their quantile is evaluated at
//! prediction time.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::models::Regressor;
use crate::quantile::{check_alpha, conformal_quantile, weighted_quantile_sorted};
use crate::{LabeledSample, PredictionInterval};

pub type SharedModel = Arc<dyn Regressor>;

/// `sigma(x)` is floored here before it divides a residual.
pub const SIGMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Framework {
    Scp,
    ScpNnm,
    Cqr,
    NexScp,
    NexScpNnm,
}

impl Framework {
    pub const ALL: [Framework; 5] = [
        Framework::Scp,
        Framework::ScpNnm,
        Framework::Cqr,
        Framework::NexScp,
        Framework::NexScpNnm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Framework::Scp => "scp",
            Framework::ScpNnm => "scp_nnm",
            Framework::Cqr => "cqr",
            Framework::NexScp => "nex_scp",
            Framework::NexScpNnm => "nex_scp_nnm",
        }
    }

    pub fn uses_sigma(self) -> bool {
        matches!(self, Framework::ScpNnm | Framework::NexScpNnm)
    }

    pub fn is_weighted(self) -> bool {
        matches!(self, Framework::NexScp | Framework::NexScpNnm)
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Framework::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown framework `{s}`")))
    }
}

enum State {
    Split {
        model: SharedModel,
        sigma: Option<SharedModel>,
        q: f64,
    },
    Cqr {
        low: SharedModel,
        high: SharedModel,
        median: Option<SharedModel>,
        q: f64,
    },
    Weighted {
        model: SharedModel,
        sigma: Option<SharedModel>,
        decay: f64,
        /// Scores ascending with the cycle index of each.
        sorted: Vec<(f64, u32)>,
    },
}

/// A base model plus the calibration state of one framework. Immutable.
pub struct CalibratedPredictor {
    framework: Framework,
    alpha: f64,
    scores: Vec<f64>,
    state: State,
}

impl fmt::Debug for CalibratedPredictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CalibratedPredictor")
            .field("framework", &self.framework)
            .field("alpha", &self.alpha)
            .field("n_calibration", &self.scores.len())
            .field("quantile", &self.quantile())
            .finish()
    }
}

fn sigma_at(sigma: &dyn Regressor, x: &[f64]) -> Result<f64> {
    Ok(sigma.predict(x)?.max(SIGMA_FLOOR))
}

fn residual_scores(
    model: &dyn Regressor,
    sigma: Option<&dyn Regressor>,
    calib: &[LabeledSample],
) -> Result<Vec<f64>> {
    calib
        .iter()
        .map(|s| {
            let residual = libm::fabs(s.target - model.predict(&s.features)?);
            match sigma {
                Some(sigma) => Ok(residual / sigma_at(sigma, &s.features)?),
                None => Ok(residual),
            }
        })
        .collect()
}

fn require_calibration(calib: &[LabeledSample]) -> Result<()> {
    if calib.is_empty() {
        Err(Error::Empty("calibration set"))
    } else {
        Ok(())
    }
}

/// Split conformal with absolute residual scores.
pub fn calibrate_scp(
    model: SharedModel,
    calib: &[LabeledSample],
    alpha: f64,
) -> Result<CalibratedPredictor> {
    check_alpha(alpha)?;
    require_calibration(calib)?;
    let scores = residual_scores(model.as_ref(), None, calib)?;
    let q = conformal_quantile(&scores, alpha)?;
    Ok(CalibratedPredictor {
        framework: Framework::Scp,
        alpha,
        scores,
        state: State::Split {
            model,
            sigma: None,
            q,
        },
    })
}

/// Split conformal with residuals normalized by `sigma(x)`.
///
/// `sigma` is expected to have been fit on the proper-training absolute
/// residuals of `model`.
pub fn calibrate_scp_nnm(
    model: SharedModel,
    sigma: SharedModel,
    calib: &[LabeledSample],
    alpha: f64,
) -> Result<CalibratedPredictor> {
    check_alpha(alpha)?;
    require_calibration(calib)?;
    let scores = residual_scores(model.as_ref(), Some(sigma.as_ref()), calib)?;
    let q = conformal_quantile(&scores, alpha)?;
    Ok(CalibratedPredictor {
        framework: Framework::ScpNnm,
        alpha,
        scores,
        state: State::Split {
            model,
            sigma: Some(sigma),
            q,
        },
    })
}

/// CQR score: positive outside `[q_low, q_high]`, nonpositive inside.
pub fn cqr_score(q_low: f64, q_high: f64, y: f64) -> f64 {
    (q_low - y).max(y - q_high)
}

/// Conformalized quantile regression.
///
/// `low` and `high` should be pinball fits at `alpha` and `1 - alpha`.
/// `median`, when given, supplies the reported point estimate.
pub fn calibrate_cqr(
    low: SharedModel,
    high: SharedModel,
    median: Option<SharedModel>,
    calib: &[LabeledSample],
    alpha: f64,
) -> Result<CalibratedPredictor> {
    check_alpha(alpha)?;
    require_calibration(calib)?;
    let scores = calib
        .iter()
        .map(|s| {
            Ok(cqr_score(
                low.predict(&s.features)?,
                high.predict(&s.features)?,
                s.target,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    let q = conformal_quantile(&scores, alpha)?;
    Ok(CalibratedPredictor {
        framework: Framework::Cqr,
        alpha,
        scores,
        state: State::Cqr {
            low,
            high,
            median,
            q,
        },
    })
}

/// Weighted split conformal for non-exchangeable data. With `sigma` the
/// scores are normalized as in [`calibrate_scp_nnm`].
pub fn calibrate_nex(
    model: SharedModel,
    calib: &[LabeledSample],
    alpha: f64,
    decay: f64,
    sigma: Option<SharedModel>,
) -> Result<CalibratedPredictor> {
    check_alpha(alpha)?;
    require_calibration(calib)?;
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::InvalidHyperparameter(alloc::format!(
            "weight decay {decay} outside (0, 1]"
        )));
    }
    if calib.iter().any(|s| s.cycle_index == 0) {
        return Err(Error::MissingCycleIndex("calibration sample"));
    }
    let scores = residual_scores(model.as_ref(), sigma.as_deref(), calib)?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }
    let mut sorted: Vec<(f64, u32)> = scores
        .iter()
        .copied()
        .zip(calib.iter().map(|s| s.cycle_index))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let framework = if sigma.is_some() {
        Framework::NexScpNnm
    } else {
        Framework::NexScp
    };
    Ok(CalibratedPredictor {
        framework,
        alpha,
        scores,
        state: State::Weighted {
            model,
            sigma,
            decay,
            sorted,
        },
    })
}

fn symmetric(point: f64, radius: f64, alpha: f64) -> PredictionInterval {
    PredictionInterval::from_raw(point - radius, point + radius, point, 2.0 * radius, alpha)
}

impl CalibratedPredictor {
    pub fn framework(&self) -> Framework {
        self.framework
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Calibration scores in calibration-set order.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// The calibrated quantile `q`; `None` for weighted frameworks, whose
    /// quantile depends on the query.
    pub fn quantile(&self) -> Option<f64> {
        match &self.state {
            State::Split { q, .. } | State::Cqr { q, .. } => Some(*q),
            State::Weighted { .. } => None,
        }
    }

    /// Weighted quantile `q(x)` for a query recorded at `cycle_index`.
    pub fn weighted_quantile(&self, cycle_index: u32) -> Option<f64> {
        match &self.state {
            State::Weighted { decay, sorted, .. } => {
                let scores: Vec<f64> = sorted.iter().map(|p| p.0).collect();
                let weights: Vec<f64> = sorted
                    .iter()
                    .map(|&(_, t)| libm::pow(*decay, t.abs_diff(cycle_index) as f64))
                    .collect();
                Some(weighted_quantile_sorted(&scores, &weights, self.alpha))
            }
            _ => None,
        }
    }

    /// Interval for feature vector `x`. Weighted frameworks need the cycle
    /// index of the query.
    pub fn predict_interval(
        &self,
        x: &[f64],
        cycle_index: Option<u32>,
    ) -> Result<PredictionInterval> {
        let alpha = self.alpha;
        match &self.state {
            State::Split {
                model,
                sigma: None,
                q,
            } => Ok(symmetric(model.predict(x)?, *q, alpha)),
            State::Split {
                model,
                sigma: Some(sigma),
                q,
            } => {
                let point = model.predict(x)?;
                Ok(symmetric(point, q * sigma_at(sigma.as_ref(), x)?, alpha))
            }
            State::Cqr {
                low,
                high,
                median,
                q,
            } => {
                let (mut lo, mut hi) = (low.predict(x)?, high.predict(x)?);
                if lo > hi {
                    core::mem::swap(&mut lo, &mut hi);
                }
                let point = match median {
                    Some(m) => m.predict(x)?,
                    None => 0.5 * (lo + hi),
                };
                Ok(PredictionInterval::from_raw(
                    lo - q,
                    hi + q,
                    point,
                    (hi - lo) + 2.0 * q,
                    alpha,
                ))
            }
            State::Weighted { model, sigma, .. } => {
                let cycle = cycle_index
                    .filter(|&t| t > 0)
                    .ok_or(Error::MissingCycleIndex("query"))?;
                let point = model.predict(x)?;
                let q = self.weighted_quantile(cycle).expect("weighted state");
                let radius = match sigma {
                    Some(sigma) => q * sigma_at(sigma.as_ref(), x)?,
                    None => q,
                };
                Ok(symmetric(point, radius, alpha))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FnRegressor;
    use alloc::vec;

    fn constant(v: f64) -> SharedModel {
        Arc::new(FnRegressor::new(1, move |_| v))
    }

    fn identity() -> SharedModel {
        Arc::new(FnRegressor::new(1, |x: &[f64]| x[0]))
    }

    /// Calibration points `x = 0` with targets chosen so the identity model's
    /// residuals are `residuals`.
    fn with_residuals(residuals: &[f64]) -> Vec<LabeledSample> {
        residuals
            .iter()
            .enumerate()
            .map(|(i, &r)| LabeledSample::new(vec![50.0], 50.0 + r, i as u32, i as u32 + 1))
            .collect()
    }

    #[test]
    fn perfect_model_collapses_intervals() {
        let calib = with_residuals(&[0.0; 20]);
        let p = calibrate_scp(identity(), &calib, 0.1).unwrap();
        assert_eq!(p.quantile(), Some(0.0));
        let iv = p.predict_interval(&[30.0], None).unwrap();
        assert_eq!((iv.lower, iv.upper, iv.width), (30.0, 30.0, 0.0));
    }

    #[test]
    fn scp_quantile_from_residuals() {
        let residuals: Vec<f64> = (1..=9).map(f64::from).collect();
        let calib = with_residuals(&residuals);
        assert_eq!(
            calibrate_scp(identity(), &calib, 0.10).unwrap().quantile(),
            Some(9.0)
        );
        assert_eq!(
            calibrate_scp(identity(), &calib, 0.25).unwrap().quantile(),
            Some(8.0)
        );
        let p = calibrate_scp(constant(100.0), &with_residuals(&residuals), 0.10).unwrap();
        // Residuals against a constant 100 are 50 - r, so q = 49.
        assert_eq!(p.quantile(), Some(49.0));
    }

    #[test]
    fn scp_interval_arithmetic() {
        let residuals: Vec<f64> = (1..=9).map(f64::from).collect();
        let p = calibrate_scp(identity(), &with_residuals(&residuals), 0.10).unwrap();
        let iv = p.predict_interval(&[100.0], None).unwrap();
        assert_eq!(
            (iv.lower, iv.upper, iv.width, iv.point),
            (91.0, 109.0, 18.0, 100.0)
        );
        let iv = p.predict_interval(&[4.0], None).unwrap();
        assert_eq!((iv.lower, iv.raw_lower, iv.upper), (0.0, -5.0, 13.0));
        assert_eq!(iv.width, 18.0);
    }

    #[test]
    fn unbounded_calibration() {
        let p = calibrate_scp(identity(), &with_residuals(&[5.0]), 0.10).unwrap();
        assert_eq!(p.quantile(), Some(f64::INFINITY));
        let iv = p.predict_interval(&[40.0], None).unwrap();
        assert_eq!((iv.lower, iv.upper), (0.0, f64::INFINITY));
        assert!(!iv.is_bounded());
    }

    #[test]
    fn nnm_normalizes_scores() {
        // residuals {2, 4} with sigma {1, 2}.
        let calib = vec![
            LabeledSample::new(vec![1.0], 12.0, 0, 1),
            LabeledSample::new(vec![2.0], 14.0, 1, 2),
        ];
        let sigma: SharedModel = Arc::new(FnRegressor::new(1, |x: &[f64]| x[0]));
        let p = calibrate_scp_nnm(constant(10.0), sigma, &calib, 0.25).unwrap();
        assert_eq!(p.scores(), &[2.0, 2.0]);
        assert_eq!(p.quantile(), Some(f64::INFINITY));
    }

    #[test]
    fn unit_sigma_matches_scp_and_scaling_is_invisible() {
        let residuals: Vec<f64> = (0..30).map(|i| libm::sin(i as f64) * 7.0).collect();
        let calib = with_residuals(&residuals);
        let scp = calibrate_scp(identity(), &calib, 0.2).unwrap();
        let nnm = calibrate_scp_nnm(identity(), constant(1.0), &calib, 0.2).unwrap();
        let sigma = |c: f64| -> SharedModel {
            Arc::new(FnRegressor::new(1, move |x: &[f64]| {
                c * (1.0 + x[0] / 50.0)
            }))
        };
        let base = calibrate_scp_nnm(identity(), sigma(1.0), &calib, 0.2).unwrap();
        for c in [1e-3, 0.5, 3.0, 1e4] {
            let scaled = calibrate_scp_nnm(identity(), sigma(c), &calib, 0.2).unwrap();
            for x in [0.0, 17.0, 80.0] {
                let a = base.predict_interval(&[x], None).unwrap();
                let b = scaled.predict_interval(&[x], None).unwrap();
                assert!(
                    (a.raw_lower - b.raw_lower).abs() < 1e-9
                        && (a.raw_upper - b.raw_upper).abs() < 1e-9
                );
            }
        }
        for x in [3.0, 60.0] {
            assert_eq!(scp.predict_interval(&[x], None).unwrap(), {
                let mut iv = nnm.predict_interval(&[x], None).unwrap();
                iv.alpha = scp.alpha();
                iv
            });
        }
    }

    #[test]
    fn sigma_floor_applies() {
        let calib = with_residuals(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let p = calibrate_scp_nnm(identity(), constant(0.0), &calib, 0.1).unwrap();
        assert_eq!(p.quantile(), Some(9.0 / SIGMA_FLOOR));
        let iv = p.predict_interval(&[10.0], None).unwrap();
        assert!((iv.upper - 19.0).abs() < 1e-9);
    }

    #[test]
    fn cqr_scores() {
        assert_eq!(cqr_score(5.0, 10.0, 12.0), 2.0);
        assert_eq!(cqr_score(5.0, 10.0, 7.0), -2.0);
        assert_eq!(cqr_score(5.0, 10.0, 5.0), 0.0);
    }

    #[test]
    fn cqr_interval_with_negative_q() {
        // Every target sits 2 inside the band [80, 120], so q = -2.
        let calib: Vec<LabeledSample> = (0..20)
            .map(|i| LabeledSample::new(vec![0.0], 82.0 + (i % 2) as f64 * 36.0, i, 1))
            .collect();
        let p = calibrate_cqr(
            constant(80.0),
            constant(120.0),
            Some(constant(100.0)),
            &calib,
            0.1,
        )
        .unwrap();
        assert_eq!(p.quantile(), Some(-2.0));
        let iv = p.predict_interval(&[0.0], None).unwrap();
        assert_eq!(
            (iv.lower, iv.upper, iv.width, iv.point),
            (82.0, 118.0, 36.0, 100.0)
        );
    }

    #[test]
    fn cqr_swaps_crossed_quantiles() {
        let calib = with_residuals(&[0.0; 9]);
        let crossed = calibrate_cqr(constant(60.0), constant(40.0), None, &calib, 0.1).unwrap();
        let iv = crossed.predict_interval(&[0.0], None).unwrap();
        // Scores use the fitted values as given: max(60 - 50, 50 - 40) = 10.
        assert_eq!(crossed.quantile(), Some(10.0));
        assert_eq!(
            (iv.lower, iv.upper, iv.point, iv.width),
            (30.0, 70.0, 50.0, 40.0)
        );
    }

    #[test]
    fn nex_weights_follow_decay() {
        let calib = vec![
            LabeledSample::new(vec![50.0], 51.0, 0, 10),
            LabeledSample::new(vec![50.0], 53.0, 0, 11),
        ];
        let p = calibrate_nex(identity(), &calib, 0.5, 0.99, None).unwrap();
        assert_eq!(p.framework(), Framework::NexScp);
        assert_eq!(p.quantile(), None);
        // cycle 10: weights {1, 0.99}; threshold 0.5 * 2.99 = 1.495 > 1 -> q = 3.
        assert_eq!(p.weighted_quantile(10), Some(3.0));
        assert_eq!(libm::pow(0.99, 0.0), 1.0);
        assert_eq!(libm::pow(0.99, 1.0), 0.99);
    }

    #[test]
    fn nex_with_equal_cycles_matches_scp() {
        let residuals: Vec<f64> = (0..25).map(|i| (i * 7 % 11) as f64).collect();
        let calib: Vec<LabeledSample> = with_residuals(&residuals)
            .into_iter()
            .map(|mut s| {
                s.cycle_index = 42;
                s
            })
            .collect();
        let scp = calibrate_scp(identity(), &calib, 0.15).unwrap();
        let nex = calibrate_nex(identity(), &calib, 0.15, 0.9, None).unwrap();
        assert_eq!(nex.weighted_quantile(42), scp.quantile());
    }

    #[test]
    fn nex_errors() {
        let mut calib = with_residuals(&[1.0, 2.0]);
        let p = calibrate_nex(identity(), &calib, 0.5, 1.0, None).unwrap();
        assert_eq!(
            p.predict_interval(&[1.0], None),
            Err(Error::MissingCycleIndex("query"))
        );
        assert!(calibrate_nex(identity(), &calib, 0.5, 0.0, None).is_err());
        assert!(calibrate_nex(identity(), &calib, 0.5, 1.5, None).is_err());
        calib[0].cycle_index = 0;
        assert!(matches!(
            calibrate_nex(identity(), &calib, 0.5, 0.99, None),
            Err(Error::MissingCycleIndex(_))
        ));
    }

    #[test]
    fn calibration_errors() {
        assert_eq!(
            calibrate_scp(identity(), &[], 0.1).unwrap_err(),
            Error::Empty("calibration set")
        );
        assert!(calibrate_scp(identity(), &with_residuals(&[1.0]), 1.2).is_err());
        let p = calibrate_scp(identity(), &with_residuals(&[1.0]), 0.5).unwrap();
        assert!(matches!(
            p.predict_interval(&[1.0, 2.0], None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!("cqr".parse::<Framework>().unwrap(), Framework::Cqr);
        assert!("jackknife".parse::<Framework>().is_err());
    }
}
