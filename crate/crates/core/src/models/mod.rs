//! Base learners and the regressor contract used by the calibration code.
//!
//! Every learner is fit through [`fit`] from a [`RegressorSpec`] and yields an
//! immutable [`FittedModel`]. Anything else implementing [`Regressor`] (for
//! example an external model wrapped with [`FnRegressor`]) can be conformalized
//! as well.

mod binning;
mod boosting;
mod forest;
mod knn;
mod loss;
mod tree;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::LabeledSample;

pub use boosting::{BoostParams, GradientBoosting};
pub use forest::{ForestParams, RandomForest};
pub use knn::NearestNeighbors;
pub use loss::{empirical_quantile, pinball_loss, Loss};
pub use tree::{RegressionTree, TreeParams};

/// A single-point regressor over fixed-dimension feature vectors.
pub trait Regressor: Send + Sync {
    fn n_features(&self) -> usize;

    /// Prediction without the dimension check.
    fn predict_unchecked(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }
}

/// Adapts a closure into a [`Regressor`].
pub struct FnRegressor<F> {
    n_features: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnRegressor<F> {
    pub fn new(n_features: usize, f: F) -> Self {
        Self { n_features, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Regressor for FnRegressor<F> {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnerKind {
    Knn { k: usize },
    RegressionTree(TreeParams),
    RandomForest(ForestParams),
    GradientBoosting(BoostParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSpec {
    pub kind: LearnerKind,
    pub loss: Loss,
}

impl RegressorSpec {
    pub fn knn(k: usize) -> Self {
        Self {
            kind: LearnerKind::Knn { k },
            loss: Loss::SquaredError,
        }
    }

    pub fn regression_tree(params: TreeParams) -> Self {
        Self {
            kind: LearnerKind::RegressionTree(params),
            loss: Loss::SquaredError,
        }
    }

    pub fn random_forest(params: ForestParams) -> Self {
        Self {
            kind: LearnerKind::RandomForest(params),
            loss: Loss::SquaredError,
        }
    }

    pub fn gradient_boosting(params: BoostParams) -> Self {
        Self {
            kind: LearnerKind::GradientBoosting(params),
            loss: Loss::SquaredError,
        }
    }

    pub fn with_loss(mut self, loss: Loss) -> Self {
        self.loss = loss;
        self
    }

    /// Builds a spec from a learner name and a flat map of named
    /// hyperparameters, starting from the learner's defaults.
    ///
    /// Recognized names: `knn` (`k`), `regression_tree` (`max_depth`,
    /// `max_leaves`, `min_samples_leaf`, `min_samples_split`, `max_bins`),
    /// `random_forest` (the tree keys plus `n_trees`, `seed`) and
    /// `gradient_boosting` (`n_iter`, `learning_rate`, `max_leaves`,
    /// `max_depth`, `min_samples_leaf`, `max_bins`).
    pub fn from_named(
        kind: &str,
        loss: Loss,
        hyperparameters: &BTreeMap<String, f64>,
    ) -> Result<Self> {
        let mut spec = match kind {
            "knn" => Self::knn(5),
            "regression_tree" => Self::regression_tree(TreeParams::default()),
            "random_forest" => Self::random_forest(ForestParams::default()),
            "gradient_boosting" => Self::gradient_boosting(BoostParams::default()),
            other => {
                return Err(Error::InvalidHyperparameter(format!(
                    "unknown learner `{other}`"
                )))
            }
        };
        spec.loss = loss;
        for (key, &value) in hyperparameters {
            let count = || -> Result<usize> {
                if value >= 0.0 && value == libm::trunc(value) {
                    Ok(value as usize)
                } else {
                    Err(Error::InvalidHyperparameter(format!(
                        "`{key}` must be a nonnegative integer"
                    )))
                }
            };
            let unknown =
                || Error::InvalidHyperparameter(format!("`{key}` does not apply to {kind}"));
            match (&mut spec.kind, key.as_str()) {
                (LearnerKind::Knn { k }, "k") => *k = count()?,
                (LearnerKind::RegressionTree(p), name) => {
                    p.set(name, count()?).ok_or_else(unknown)?
                }
                (LearnerKind::RandomForest(p), "n_trees") => p.n_trees = count()?,
                (LearnerKind::RandomForest(p), "seed") => p.seed = count()? as u64,
                (LearnerKind::RandomForest(p), name) => {
                    p.tree.set(name, count()?).ok_or_else(unknown)?
                }
                (LearnerKind::GradientBoosting(p), "learning_rate") => p.learning_rate = value,
                (LearnerKind::GradientBoosting(p), "n_iter") => p.n_iter = count()?,
                (LearnerKind::GradientBoosting(p), "max_leaves") => p.max_leaves = count()?,
                (LearnerKind::GradientBoosting(p), "max_depth") => p.max_depth = Some(count()?),
                (LearnerKind::GradientBoosting(p), "min_samples_leaf") => {
                    p.min_samples_leaf = count()?
                }
                (LearnerKind::GradientBoosting(p), "max_bins") => p.max_bins = count()?,
                _ => return Err(unknown()),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        let bad = |msg: &str| Err(Error::InvalidHyperparameter(String::from(msg)));
        match &self.kind {
            LearnerKind::Knn { k } if *k == 0 => bad("k must be positive"),
            LearnerKind::RegressionTree(p) => p.validate(),
            LearnerKind::RandomForest(p) if p.n_trees == 0 => bad("n_trees must be positive"),
            LearnerKind::RandomForest(p) => p.tree.validate(),
            LearnerKind::GradientBoosting(p) => p.validate(),
            LearnerKind::Knn { .. } => Ok(()),
        }
    }
}

/// An immutable fitted learner.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Knn(NearestNeighbors),
    Tree(RegressionTree),
    Forest(RandomForest),
    Boosting(GradientBoosting),
}

impl Regressor for FittedModel {
    fn n_features(&self) -> usize {
        match self {
            FittedModel::Knn(m) => m.n_features(),
            FittedModel::Tree(m) => m.n_features,
            FittedModel::Forest(m) => m.n_features(),
            FittedModel::Boosting(m) => m.n_features(),
        }
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Tree(m) => m.tree.predict(x),
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Boosting(m) => m.predict(x),
        }
    }
}

/// Training matrix view: rows borrowed from the samples, targets copied.
pub(crate) struct TrainingSet<'a> {
    pub rows: Vec<&'a [f64]>,
    pub targets: Vec<f64>,
    pub n_features: usize,
}

impl<'a> TrainingSet<'a> {
    fn new(data: &'a [LabeledSample]) -> Result<Self> {
        let first = data.first().ok_or(Error::Empty("training set"))?;
        let n_features = first.features.len();
        let mut rows = Vec::with_capacity(data.len());
        let mut targets = Vec::with_capacity(data.len());
        for s in data {
            if s.features.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    found: s.features.len(),
                });
            }
            if !s.target.is_finite() || s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("training data"));
            }
            rows.push(s.features.as_slice());
            targets.push(s.target);
        }
        Ok(Self {
            rows,
            targets,
            n_features,
        })
    }
}

/// Fits the learner described by `spec` on `data`.
pub fn fit(spec: &RegressorSpec, data: &[LabeledSample]) -> Result<FittedModel> {
    spec.validate()?;
    let set = TrainingSet::new(data)?;
    Ok(match &spec.kind {
        LearnerKind::Knn { k } => FittedModel::Knn(NearestNeighbors::fit(&set, *k, spec.loss)),
        LearnerKind::RegressionTree(p) => {
            FittedModel::Tree(RegressionTree::fit(&set, p, spec.loss))
        }
        LearnerKind::RandomForest(p) => FittedModel::Forest(RandomForest::fit(&set, p, spec.loss)),
        LearnerKind::GradientBoosting(p) => {
            FittedModel::Boosting(GradientBoosting::fit(&set, p, spec.loss))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn samples(points: &[(f64, f64)]) -> Vec<LabeledSample> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| LabeledSample::new(vec![x], y, i as u32, 1))
            .collect()
    }

    #[test]
    fn one_nn_memorizes() {
        let data = samples(&[(0.0, 5.0)]);
        let m = fit(&RegressorSpec::knn(1), &data).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), 5.0);
    }

    #[test]
    fn depth_zero_leaves() {
        let mean_tree = RegressorSpec::regression_tree(TreeParams {
            max_depth: Some(0),
            ..TreeParams::default()
        });
        let m = fit(&mean_tree, &samples(&[(0.0, 1.0), (1.0, 3.0)])).unwrap();
        assert_eq!(m.predict(&[-100.0]).unwrap(), 2.0);
        assert_eq!(m.predict(&[100.0]).unwrap(), 2.0);

        let data: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, i as f64)).collect();
        let m = fit(&mean_tree.with_loss(Loss::Pinball(0.9)), &samples(&data)).unwrap();
        assert_eq!(m.predict(&[3.0]).unwrap(), 9.0);
    }

    #[test]
    fn fit_errors() {
        let spec = RegressorSpec::knn(1);
        assert_eq!(fit(&spec, &[]).unwrap_err(), Error::Empty("training set"));
        let mut data = samples(&[(0.0, 1.0), (1.0, 2.0)]);
        data[1].features.push(3.0);
        assert!(matches!(
            fit(&spec, &data),
            Err(Error::DimensionMismatch { .. })
        ));
        let data = samples(&[(0.0, 1.0)]);
        assert!(fit(&RegressorSpec::knn(0), &data).is_err());
        assert!(fit(&spec.clone().with_loss(Loss::Pinball(1.0)), &data).is_err());
        assert!(fit(&spec.clone().with_loss(Loss::Pinball(0.0)), &data).is_err());
        let m = fit(&spec, &data).unwrap();
        assert!(matches!(
            m.predict(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn named_hyperparameters() {
        let mut hp = BTreeMap::new();
        hp.insert(String::from("n_iter"), 7.0);
        hp.insert(String::from("learning_rate"), 0.3);
        let spec = RegressorSpec::from_named("gradient_boosting", Loss::Pinball(0.1), &hp).unwrap();
        match spec.kind {
            LearnerKind::GradientBoosting(p) => {
                assert_eq!(p.n_iter, 7);
                assert_eq!(p.learning_rate, 0.3);
                assert_eq!(p.max_leaves, 31);
            }
            _ => panic!("wrong learner"),
        }
        hp.insert(String::from("k"), 3.0);
        assert!(RegressorSpec::from_named("gradient_boosting", Loss::SquaredError, &hp).is_err());
        assert!(RegressorSpec::from_named("svm", Loss::SquaredError, &BTreeMap::new()).is_err());
        let mut hp = BTreeMap::new();
        hp.insert(String::from("n_trees"), 2.5);
        assert!(RegressorSpec::from_named("random_forest", Loss::SquaredError, &hp).is_err());
    }
}
