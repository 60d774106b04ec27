use alloc::vec::Vec;

use super::{Loss, TrainingSet};

/// Brute-force k-nearest-neighbour regression (squared Euclidean distance,
/// ties broken by training order).
#[derive(Debug, Clone)]
pub struct NearestNeighbors {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    k: usize,
    loss: Loss,
}

impl NearestNeighbors {
    pub(crate) fn fit(set: &TrainingSet<'_>, k: usize, loss: Loss) -> Self {
        Self {
            rows: set.rows.iter().map(|r| r.to_vec()).collect(),
            targets: set.targets.clone(),
            k: k.min(set.rows.len()),
            loss,
        }
    }

    pub fn n_features(&self) -> usize {
        self.rows[0].len()
    }

    pub(crate) fn predict(&self, x: &[f64]) -> f64 {
        let mut by_distance: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut neighbours: Vec<f64> = by_distance[..self.k]
            .iter()
            .map(|&(_, i)| self.targets[i])
            .collect();
        self.loss.optimal_constant(&mut neighbours)
    }
}
