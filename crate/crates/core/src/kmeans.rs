//! Lloyd's k-means with k-means++ seeding, used to discover operating modes
//! from the operational settings.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub max_iter: usize,
    /// Independent seedings; the lowest-inertia run wins.
    pub n_init: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iter: 300,
            n_init: 10,
        }
    }
}

/// Fitted centroids. Points are assigned to the nearest centroid by squared
/// Euclidean distance, ties to the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeModel<const D: usize> {
    centroids: Vec<[f64; D]>,
    inertia: f64,
}

fn sq_dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest<const D: usize>(centroids: &[[f64; D]], p: &[f64; D]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

impl<const D: usize> ModeModel<D> {
    pub fn from_centroids(centroids: Vec<[f64; D]>) -> Self {
        Self {
            centroids,
            inertia: f64::NAN,
        }
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn centroids(&self) -> &[[f64; D]] {
        &self.centroids
    }

    /// Sum of squared distances to the assigned centroid on the fit data.
    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn assign(&self, p: &[f64; D]) -> usize {
        nearest(&self.centroids, p).0
    }
}

fn count_distinct<const D: usize>(rows: &[[f64; D]]) -> usize {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    sorted.dedup();
    sorted.len()
}

fn plus_plus<const D: usize>(rows: &[[f64; D]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; D]> {
    let mut centroids = vec![rows[rng.random_range(0..rows.len())]];
    let mut dist: Vec<f64> = rows.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = rows.len() - 1;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // Guard against rounding landing on an existing centroid.
            if dist[chosen] == 0.0 {
                dist.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap()
                    .0
            } else {
                chosen
            }
        } else {
            rng.random_range(0..rows.len())
        };
        let c = rows[next];
        for (d, p) in dist.iter_mut().zip(rows) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd<const D: usize>(
    rows: &[[f64; D]],
    mut centroids: Vec<[f64; D]>,
    max_iter: usize,
) -> ModeModel<D> {
    let k = centroids.len();
    let mut labels = vec![usize::MAX; rows.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (label, p) in labels.iter_mut().zip(rows) {
            let (c, _) = nearest(&centroids, p);
            if *label != c {
                *label = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![[0.0; D]; k];
        let mut counts = vec![0usize; k];
        for (&label, p) in labels.iter().zip(rows) {
            counts[label] += 1;
            for (s, v) in sums[label].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster at the point farthest from its centroid.
                let far = rows
                    .iter()
                    .zip(&labels)
                    .map(|(p, &l)| sq_dist(p, &centroids[l]))
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap()
                    .0;
                centroids[c] = rows[far];
                labels[far] = c;
            } else {
                for (dst, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
    }
    let inertia = rows.iter().map(|p| nearest(&centroids, p).1).sum();
    ModeModel { centroids, inertia }
}

/// Clusters `rows` into `k` modes.
pub fn fit_modes<const D: usize>(
    rows: &[[f64; D]],
    k: usize,
    seed: u64,
    params: KMeansParams,
) -> Result<ModeModel<D>> {
    if rows.is_empty() {
        return Err(Error::Empty("settings rows"));
    }
    if k == 0 {
        return Err(Error::InvalidHyperparameter("k must be positive".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("settings rows"));
    }
    let distinct = count_distinct(rows);
    if distinct < k {
        return Err(Error::TooFewDistinctRows { k, distinct });
    }
    if k == 1 {
        let mut mean = [0.0; D];
        for p in rows {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= rows.len() as f64;
        }
        let inertia = rows.iter().map(|p| sq_dist(p, &mean)).sum();
        return Ok(ModeModel {
            centroids: vec![mean],
            inertia,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<ModeModel<D>> = None;
    for _ in 0..params.n_init.max(1) {
        let init = plus_plus(rows, k, &mut rng);
        let model = lloyd(rows, init, params.max_iter);
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    Ok(best.unwrap())
}
