use alloc::vec::Vec;

/// Per-feature split thresholds. A value `x` falls in bin
/// `#{t : t < x}`, so "bin <= b" is equivalent to `x <= thresholds[b]`.
#[derive(Debug, Clone)]
pub(crate) struct BinMapper {
    thresholds: Vec<Vec<f64>>,
}

impl BinMapper {
    pub(crate) fn fit(rows: &[&[f64]], n_features: usize, max_bins: usize) -> Self {
        let mut thresholds = Vec::with_capacity(n_features);
        let mut column = Vec::with_capacity(rows.len());
        for f in 0..n_features {
            column.clear();
            column.extend(rows.iter().map(|r| r[f]));
            column.sort_unstable_by(f64::total_cmp);
            let mut distinct = column.clone();
            distinct.dedup();
            let mut cuts: Vec<f64> = if distinct.len() <= max_bins {
                distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect()
            } else {
                let n = column.len();
                (1..max_bins)
                    .map(|i| {
                        let idx = (i * n / max_bins).max(1);
                        midpoint(column[idx - 1], column[idx])
                    })
                    .collect()
            };
            // The top cut never separates anything once it reaches the maximum.
            let max = *column.last().unwrap();
            cuts.retain(|&t| t < max);
            cuts.dedup();
            thresholds.push(cuts);
        }
        Self { thresholds }
    }

    pub(crate) fn n_bins(&self, feature: usize) -> usize {
        self.thresholds[feature].len() + 1
    }

    pub(crate) fn threshold(&self, feature: usize, bin: usize) -> f64 {
        self.thresholds[feature][bin]
    }

    pub(crate) fn bin(&self, feature: usize, x: f64) -> u8 {
        self.thresholds[feature].partition_point(|&t| t < x) as u8
    }

    pub(crate) fn transform(&self, rows: &[&[f64]]) -> BinnedMatrix {
        let n_features = self.thresholds.len();
        let mut bins = Vec::with_capacity(rows.len() * n_features);
        for f in 0..n_features {
            bins.extend(rows.iter().map(|r| self.bin(f, r[f])));
        }
        BinnedMatrix {
            n_rows: rows.len(),
            n_features,
            bins,
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

/// Column-major bin indices.
#[derive(Debug, Clone)]
pub(crate) struct BinnedMatrix {
    pub(crate) n_rows: usize,
    pub(crate) n_features: usize,
    bins: Vec<u8>,
}

impl BinnedMatrix {
    pub(crate) fn column(&self, feature: usize) -> &[u8] {
        &self.bins[feature * self.n_rows..(feature + 1) * self.n_rows]
    }

    pub(crate) fn get(&self, row: usize, feature: usize) -> u8 {
        self.bins[feature * self.n_rows + row]
    }
}
