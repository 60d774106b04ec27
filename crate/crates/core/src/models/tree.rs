//! Histogram-based regression tree growth shared by every tree learner.
//!
//! Splits are scored on per-row negative gradients with a unit hessian:
//! `G_L^2 / n_L + G_R^2 / n_R - G^2 / n`. Leaf values are supplied by the
//! caller, which lets each learner re-optimize leaves for its loss.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::binning::{BinMapper, BinnedMatrix};

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        bin: u8,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub(crate) fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn predict_binned(&self, matrix: &BinnedMatrix, row: usize) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    bin,
                    left,
                    right,
                    ..
                } => {
                    i = if matrix.get(row, feature) <= bin {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub(crate) fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    bin: u8,
    gain: f64,
}

struct Pending {
    gain: f64,
    seq: usize,
    node: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest gain first, then oldest node.
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn best_split(
    matrix: &BinnedMatrix,
    mapper: &BinMapper,
    rows: &[u32],
    gradients: &[f64],
    min_leaf: usize,
    hist: &mut Vec<(f64, usize)>,
) -> Option<Candidate> {
    let n = rows.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let total: f64 = rows.iter().map(|&r| gradients[r as usize]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<Candidate> = None;
    for f in 0..matrix.n_features {
        let n_bins = mapper.n_bins(f);
        if n_bins < 2 {
            continue;
        }
        hist.clear();
        hist.resize(n_bins, (0.0, 0));
        let column = matrix.column(f);
        for &r in rows {
            let slot = &mut hist[column[r as usize] as usize];
            slot.0 += gradients[r as usize];
            slot.1 += 1;
        }
        let (mut g_left, mut n_left) = (0.0, 0usize);
        for (b, &(g, c)) in hist[..n_bins - 1].iter().enumerate() {
            g_left += g;
            n_left += c;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf || c == 0 {
                continue;
            }
            let g_right = total - g_left;
            let gain =
                g_left * g_left / n_left as f64 + g_right * g_right / n_right as f64 - parent;
            // Strict comparison keeps the lowest feature, then lowest threshold, on ties.
            if gain > best.map_or(0.0, |c| c.gain) {
                best = Some(Candidate {
                    feature: f,
                    bin: b as u8,
                    gain,
                });
            }
        }
    }
    best
}

pub(crate) fn grow(
    matrix: &BinnedMatrix,
    mapper: &BinMapper,
    rows: Vec<u32>,
    gradients: &[f64],
    params: &GrowParams,
    leaf_value: &mut dyn FnMut(&[u32]) -> f64,
) -> Tree {
    let min_leaf = params.min_samples_leaf.max(1);
    let mut hist = Vec::new();
    let mut nodes = vec![Node::Leaf(0.0)];
    let mut node_rows: Vec<Option<Vec<u32>>> = vec![Some(rows)];
    let mut depth = vec![0usize];
    let mut candidates: Vec<Option<Candidate>> = vec![None];
    let mut heap = BinaryHeap::new();
    let mut seq = 0;

    let can_split = |d: usize, n: usize| -> bool {
        params.max_depth.is_none_or(|m| d < m) && n >= params.min_samples_split.max(2)
    };

    let mut consider = |node: usize,
                        node_rows: &[Option<Vec<u32>>],
                        depth: &[usize],
                        candidates: &mut Vec<Option<Candidate>>,
                        heap: &mut BinaryHeap<Pending>,
                        hist: &mut Vec<(f64, usize)>| {
        let r = node_rows[node].as_ref().unwrap();
        if !can_split(depth[node], r.len()) {
            return;
        }
        if let Some(c) = best_split(matrix, mapper, r, gradients, min_leaf, hist) {
            candidates[node] = Some(c);
            heap.push(Pending {
                gain: c.gain,
                seq,
                node,
            });
            seq += 1;
        }
    };

    consider(0, &node_rows, &depth, &mut candidates, &mut heap, &mut hist);
    let mut n_leaves = 1;
    while let Some(Pending { node, .. }) = heap.pop() {
        if params.max_leaves.is_some_and(|m| n_leaves >= m) {
            break;
        }
        let c = candidates[node].take().unwrap();
        let rows = node_rows[node].take().unwrap();
        let column = matrix.column(c.feature);
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
            rows.into_iter().partition(|&r| column[r as usize] <= c.bin);
        let left = nodes.len();
        let right = left + 1;
        nodes[node] = Node::Split {
            feature: c.feature,
            bin: c.bin,
            threshold: mapper.threshold(c.feature, c.bin as usize),
            left,
            right,
        };
        for child_rows in [left_rows, right_rows] {
            nodes.push(Node::Leaf(0.0));
            node_rows.push(Some(child_rows));
            depth.push(depth[node] + 1);
            candidates.push(None);
        }
        n_leaves += 1;
        consider(
            left,
            &node_rows,
            &depth,
            &mut candidates,
            &mut heap,
            &mut hist,
        );
        consider(
            right,
            &node_rows,
            &depth,
            &mut candidates,
            &mut heap,
            &mut hist,
        );
    }

    for (node, rows) in node_rows.iter().enumerate() {
        if let Some(rows) = rows {
            nodes[node] = Node::Leaf(leaf_value(rows));
        }
    }
    Tree { nodes }
}

/// Growth limits for a single regression tree (also used by forests).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_bins: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            max_leaves: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_bins: 255,
        }
    }
}

impl TreeParams {
    pub(crate) fn set(&mut self, name: &str, value: usize) -> Option<()> {
        match name {
            "max_depth" => self.max_depth = Some(value),
            "max_leaves" => self.max_leaves = Some(value),
            "min_samples_leaf" => self.min_samples_leaf = value,
            "min_samples_split" => self.min_samples_split = value,
            "max_bins" => self.max_bins = value,
            _ => return None,
        }
        Some(())
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        if !(2..=256).contains(&self.max_bins) {
            return Err(crate::Error::InvalidHyperparameter(
                "max_bins must lie in 2..=256".into(),
            ));
        }
        if self.max_leaves == Some(0) || self.min_samples_leaf == 0 {
            return Err(crate::Error::InvalidHyperparameter(
                "max_leaves and min_samples_leaf must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn grow_params(&self) -> GrowParams {
        GrowParams {
            max_depth: self.max_depth,
            max_leaves: self.max_leaves,
            min_samples_leaf: self.min_samples_leaf,
            min_samples_split: self.min_samples_split,
        }
    }
}

/// A single tree fit directly on the targets.
///
/// Splits are scored on the targets (squared error) or on the pinball
/// gradient at the global quantile; leaves hold the mean or the empirical
/// `tau`-quantile of their targets.
#[derive(Debug, Clone)]
pub struct RegressionTree {
    pub(crate) n_features: usize,
    pub(crate) tree: Tree,
}

impl RegressionTree {
    pub(crate) fn fit(
        set: &super::TrainingSet<'_>,
        params: &TreeParams,
        loss: super::Loss,
    ) -> Self {
        let rows: Vec<u32> = (0..set.rows.len() as u32).collect();
        let mapper = BinMapper::fit(&set.rows, set.n_features, params.max_bins);
        let matrix = mapper.transform(&set.rows);
        let tree = fit_on_rows(set, &mapper, &matrix, params, loss, rows);
        Self {
            n_features: set.n_features,
            tree,
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.tree.n_leaves()
    }
}

/// Fits one tree on a (possibly repeated) subset of rows.
pub(crate) fn fit_on_rows(
    set: &super::TrainingSet<'_>,
    mapper: &BinMapper,
    matrix: &BinnedMatrix,
    params: &TreeParams,
    loss: super::Loss,
    rows: Vec<u32>,
) -> Tree {
    let mut buf: Vec<f64> = rows.iter().map(|&r| set.targets[r as usize]).collect();
    let center = loss.optimal_constant(&mut buf);
    let gradients: Vec<f64> = set
        .targets
        .iter()
        .map(|&y| loss.negative_gradient(y, center))
        .collect();
    let mut leaf = |leaf_rows: &[u32]| {
        buf.clear();
        buf.extend(leaf_rows.iter().map(|&r| set.targets[r as usize]));
        loss.optimal_constant(&mut buf)
    };
    grow(
        matrix,
        mapper,
        rows,
        &gradients,
        &params.grow_params(),
        &mut leaf,
    )
}
