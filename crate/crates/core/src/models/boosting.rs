//! Histogram gradient boosting.
//!
//! Each round fits a best-first tree to the negative loss gradient at the
//! current predictions, then re-optimizes every leaf for the loss on the
//! residuals that reach it (mean for squared error, empirical `tau`-quantile
//! for pinball). Predictions are `init + learning_rate * sum(tree(x))`.

use alloc::vec::Vec;

use super::binning::BinMapper;
use super::tree::{grow, GrowParams, Tree};
use super::{Loss, TrainingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub n_iter: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_bins: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_iter: 100,
            learning_rate: 0.1,
            max_leaves: 31,
            max_depth: None,
            min_samples_leaf: 20,
            max_bins: 255,
        }
    }
}

impl BoostParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidHyperparameter(
                "learning_rate must be positive".into(),
            ));
        }
        if self.max_leaves < 2 || self.min_samples_leaf == 0 || !(2..=256).contains(&self.max_bins)
        {
            return Err(Error::InvalidHyperparameter(
                "need max_leaves >= 2, min_samples_leaf >= 1 and max_bins in 2..=256".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GradientBoosting {
    n_features: usize,
    init: f64,
    learning_rate: f64,
    trees: Vec<Tree>,
}

impl GradientBoosting {
    pub(crate) fn fit(set: &TrainingSet<'_>, params: &BoostParams, loss: Loss) -> Self {
        let n = set.rows.len();
        let mapper = BinMapper::fit(&set.rows, set.n_features, params.max_bins);
        let matrix = mapper.transform(&set.rows);
        let mut buf = set.targets.clone();
        let init = loss.optimal_constant(&mut buf);
        let mut predictions = alloc::vec![init; n];
        let mut gradients = alloc::vec![0.0; n];
        let grow_params = GrowParams {
            max_depth: params.max_depth,
            max_leaves: Some(params.max_leaves),
            min_samples_leaf: params.min_samples_leaf,
            min_samples_split: 2,
        };
        let mut trees = Vec::with_capacity(params.n_iter);
        for _ in 0..params.n_iter {
            for ((g, &y), &p) in gradients.iter_mut().zip(&set.targets).zip(&predictions) {
                *g = loss.negative_gradient(y, p);
            }
            let mut leaf = |rows: &[u32]| {
                buf.clear();
                buf.extend(
                    rows.iter()
                        .map(|&r| set.targets[r as usize] - predictions[r as usize]),
                );
                loss.optimal_constant(&mut buf)
            };
            let tree = grow(
                &matrix,
                &mapper,
                (0..n as u32).collect(),
                &gradients,
                &grow_params,
                &mut leaf,
            );
            for (row, p) in predictions.iter_mut().enumerate() {
                *p += params.learning_rate * tree.predict_binned(&matrix, row);
            }
            trees.push(tree);
        }
        Self {
            n_features: set.n_features,
            init,
            learning_rate: params.learning_rate,
            trees,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> f64 {
        let mut acc = self.init;
        for t in &self.trees {
            acc += self.learning_rate * t.predict(x);
        }
        acc
    }
}
