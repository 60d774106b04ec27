//! Experiment orchestration: unit-level splits, the base-model suite,
//! coverage/width metrics and the synthetic validity study.

mod synth;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use synth::{noise_scale, synth_draw, synth_generate, truth, Noise, SynthSplit, SYNTH_DIM};

use crate::cmapss::{FeatureMode, Prepared};
use crate::conformal::{
    calibrate_cqr, calibrate_nex, calibrate_scp, calibrate_scp_nnm, CalibratedPredictor, Framework,
    SharedModel,
};
use crate::error::{Error, Result};
use crate::models::{fit, BoostParams, ForestParams, LearnerKind, Loss, RegressorSpec};
use crate::{LabeledSample, PredictionInterval};

/// Default share of training units held out for calibration.
pub const DEFAULT_CALIB_FRACTION: f64 = 0.10;
/// Default decay of the weighted frameworks' similarity weights.
pub const DEFAULT_WEIGHT_DECAY: f64 = 0.99;
pub const DEFAULT_ALPHAS: [f64; 4] = [0.10, 0.15, 0.20, 0.25];
pub const DEFAULT_N_SEEDS: u64 = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub seed: u64,
    pub calib_fraction: f64,
}

/// Shuffles `0..n` with the plan's seed and returns `(train, calib)` index
/// sets, each ascending. The calibration set has `round(fraction * n)`
/// members.
pub fn split_indices(n: usize, plan: &SplitPlan) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(plan.calib_fraction > 0.0 && plan.calib_fraction < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "calibration fraction {} outside (0, 1)",
            plan.calib_fraction
        )));
    }
    let n_calib = libm::round(plan.calib_fraction * n as f64) as usize;
    if n_calib == 0 {
        return Err(Error::EmptySplit("calibration"));
    }
    if n_calib >= n {
        return Err(Error::EmptySplit("training"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(plan.seed));
    let mut calib = order[..n_calib].to_vec();
    let mut train = order[n_calib..].to_vec();
    calib.sort_unstable();
    train.sort_unstable();
    Ok((train, calib))
}

/// Splits whole units into `(train, calib)`.
pub fn split_units<T: Clone>(units: &[T], plan: &SplitPlan) -> Result<(Vec<T>, Vec<T>)> {
    let (train, calib) = split_indices(units.len(), plan)?;
    Ok((
        train.iter().map(|&i| units[i].clone()).collect(),
        calib.iter().map(|&i| units[i].clone()).collect(),
    ))
}

/// Coverage and width of a batch of intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStats {
    pub n: usize,
    pub coverage: f64,
    /// Mean width over bounded intervals; `inf` if none is bounded.
    pub mean_width: f64,
    /// Population standard deviation of bounded widths.
    pub width_std: f64,
    pub n_unbounded: usize,
}

/// Unbounded intervals count as covering and are excluded from widths.
pub fn interval_stats(intervals: &[PredictionInterval], targets: &[f64]) -> IntervalStats {
    assert_eq!(intervals.len(), targets.len());
    let covered = intervals
        .iter()
        .zip(targets)
        .filter(|(iv, &y)| iv.contains(y))
        .count();
    // Welford, so identical widths give exactly zero spread.
    let (mut count, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for iv in intervals.iter().filter(|iv| iv.is_bounded()) {
        count += 1;
        let delta = iv.width - mean;
        mean += delta / count as f64;
        m2 += delta * (iv.width - mean);
    }
    IntervalStats {
        n: intervals.len(),
        coverage: covered as f64 / intervals.len().max(1) as f64,
        mean_width: if count == 0 { f64::INFINITY } else { mean },
        width_std: if count == 0 {
            0.0
        } else {
            libm::sqrt(m2 / count as f64)
        },
        n_unbounded: intervals.len() - count,
    }
}

/// Learner specs for the point model, the `sigma` model and the quantile
/// models (whose loss is replaced per level).
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSuite {
    pub point: RegressorSpec,
    pub sigma: RegressorSpec,
    pub quantile: RegressorSpec,
}

impl LearnerSuite {
    /// Gradient boosting for point and quantile models, a random forest for
    /// `sigma`.
    pub fn gradient_boosting(boost: BoostParams, forest: ForestParams) -> Self {
        let gb = RegressorSpec::gradient_boosting(boost);
        Self {
            point: gb.clone(),
            sigma: RegressorSpec::random_forest(forest),
            quantile: gb,
        }
    }
}

impl Default for LearnerSuite {
    fn default() -> Self {
        Self::gradient_boosting(BoostParams::default(), ForestParams::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub frameworks: Vec<Framework>,
    pub alphas: Vec<f64>,
    pub calib_fraction: f64,
    pub weight_decay: f64,
    pub learners: LearnerSuite,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            frameworks: Framework::ALL.to_vec(),
            alphas: DEFAULT_ALPHAS.to_vec(),
            calib_fraction: DEFAULT_CALIB_FRACTION,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            learners: LearnerSuite::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frameworks.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidConfig(
                "need at least one framework and one alpha".into(),
            ));
        }
        if let Some(&a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::InvalidAlpha(a));
        }
        if !(self.weight_decay > 0.0 && self.weight_decay <= 1.0) {
            return Err(Error::InvalidConfig("weight decay outside (0, 1]".into()));
        }
        self.learners.point.validate()?;
        self.learners.sigma.validate()?;
        self.learners.quantile.validate()
    }
}

/// Training data grouped by unit plus the held-out test points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub name: String,
    pub train_groups: Vec<Vec<LabeledSample>>,
    pub test: Vec<LabeledSample>,
}

impl ExperimentData {
    /// Groups samples by `unit_id`, keeping first-appearance order.
    pub fn from_samples(
        name: impl Into<String>,
        train: Vec<LabeledSample>,
        test: Vec<LabeledSample>,
    ) -> Self {
        let mut index: BTreeMap<u32, usize> = BTreeMap::new();
        let mut groups: Vec<Vec<LabeledSample>> = Vec::new();
        for s in train {
            let slot = *index.entry(s.unit_id).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[slot].push(s);
        }
        Self {
            name: name.into(),
            train_groups: groups,
            test,
        }
    }

    pub fn from_prepared(
        name: impl Into<String>,
        prepared: &Prepared,
        mode: FeatureMode,
    ) -> Result<Self> {
        Ok(Self::from_samples(
            name,
            prepared.training_samples(mode)?,
            prepared.test_samples(mode)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRecord {
    pub unit_id: u32,
    pub cycle_index: u32,
    pub y_true: f64,
    pub y_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

/// Outcome of one (framework, alpha, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub framework: Framework,
    pub alpha: f64,
    pub seed: u64,
    pub stats: IntervalStats,
    pub intervals: Vec<IntervalRecord>,
}

/// Models fit on one proper training set.
pub struct FittedSuite {
    pub point: SharedModel,
    pub sigma: Option<SharedModel>,
    pub median: Option<SharedModel>,
    quantiles: Vec<(f64, SharedModel)>,
}

impl FittedSuite {
    /// Fits whatever `frameworks` need: the point model always, `sigma` on
    /// the point model's absolute training residuals, and pinball models at
    /// `alpha`, `1 - alpha` and 0.5 for CQR.
    pub fn fit(
        train: &[LabeledSample],
        learners: &LearnerSuite,
        frameworks: &[Framework],
        alphas: &[f64],
        seed: u64,
    ) -> Result<Self> {
        let point: SharedModel = Arc::new(fit(&learners.point, train)?);
        let sigma = if frameworks.iter().any(|f| f.uses_sigma()) {
            let residuals = train
                .iter()
                .map(|s| {
                    let mut r = s.clone();
                    r.target = libm::fabs(s.target - point.predict_unchecked(&s.features));
                    r
                })
                .collect::<Vec<_>>();
            let mut spec = learners.sigma.clone();
            if let LearnerKind::RandomForest(p) = &mut spec.kind {
                p.seed = p.seed.wrapping_add(seed);
            }
            Some(Arc::new(fit(&spec, &residuals)?) as SharedModel)
        } else {
            None
        };
        let mut quantiles = Vec::new();
        let mut median = None;
        if frameworks.contains(&Framework::Cqr) {
            let levels = alphas.iter().flat_map(|&a| [a, 1.0 - a]);
            for tau in levels {
                if quantiles.iter().all(|(t, _)| *t != tau) {
                    let spec = learners.quantile.clone().with_loss(Loss::Pinball(tau));
                    quantiles.push((tau, Arc::new(fit(&spec, train)?) as SharedModel));
                }
            }
            let spec = learners.quantile.clone().with_loss(Loss::Pinball(0.5));
            median = Some(Arc::new(fit(&spec, train)?) as SharedModel);
        }
        Ok(Self {
            point,
            sigma,
            median,
            quantiles,
        })
    }

    pub fn quantile_model(&self, tau: f64) -> Option<SharedModel> {
        self.quantiles
            .iter()
            .find(|(t, _)| *t == tau)
            .map(|(_, m)| m.clone())
    }

    pub fn calibrate(
        &self,
        framework: Framework,
        calib: &[LabeledSample],
        alpha: f64,
        weight_decay: f64,
    ) -> Result<CalibratedPredictor> {
        let sigma = || {
            self.sigma
                .clone()
                .ok_or_else(|| Error::InvalidConfig("sigma model was not fit".into()))
        };
        match framework {
            Framework::Scp => calibrate_scp(self.point.clone(), calib, alpha),
            Framework::ScpNnm => calibrate_scp_nnm(self.point.clone(), sigma()?, calib, alpha),
            Framework::Cqr => {
                let missing =
                    || Error::InvalidConfig(alloc::format!("no quantile models for alpha {alpha}"));
                let low = self.quantile_model(alpha).ok_or_else(missing)?;
                let high = self.quantile_model(1.0 - alpha).ok_or_else(missing)?;
                calibrate_cqr(low, high, self.median.clone(), calib, alpha)
            }
            Framework::NexScp => {
                calibrate_nex(self.point.clone(), calib, alpha, weight_decay, None)
            }
            Framework::NexScpNnm => calibrate_nex(
                self.point.clone(),
                calib,
                alpha,
                weight_decay,
                Some(sigma()?),
            ),
        }
    }
}

fn predict_all(
    predictor: &CalibratedPredictor,
    test: &[LabeledSample],
) -> Result<Vec<PredictionInterval>> {
    test.iter()
        .map(|s| predictor.predict_interval(&s.features, Some(s.cycle_index)))
        .collect()
}

/// One seed: split units, fit the suite on the proper training set,
/// calibrate every (framework, alpha) and evaluate on the test points.
pub fn run_seed(
    data: &ExperimentData,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let plan = SplitPlan {
        seed,
        calib_fraction: config.calib_fraction,
    };
    let (train_groups, calib_groups) = split_units(&data.train_groups, &plan)?;
    let train: Vec<LabeledSample> = train_groups.into_iter().flatten().collect();
    let calib: Vec<LabeledSample> = calib_groups.into_iter().flatten().collect();
    let suite = FittedSuite::fit(
        &train,
        &config.learners,
        &config.frameworks,
        &config.alphas,
        seed,
    )?;
    let targets: Vec<f64> = data.test.iter().map(|s| s.target).collect();
    let mut records = Vec::new();
    for &framework in &config.frameworks {
        for &alpha in &config.alphas {
            let predictor = suite.calibrate(framework, &calib, alpha, config.weight_decay)?;
            let intervals = predict_all(&predictor, &data.test)?;
            let stats = interval_stats(&intervals, &targets);
            let intervals = intervals
                .iter()
                .zip(&data.test)
                .map(|(iv, s)| IntervalRecord {
                    unit_id: s.unit_id,
                    cycle_index: s.cycle_index,
                    y_true: s.target,
                    y_hat: iv.point,
                    lower: iv.lower,
                    upper: iv.upper,
                    width: iv.width,
                })
                .collect();
            records.push(RunRecord {
                dataset: data.name.clone(),
                framework,
                alpha,
                seed,
                stats,
                intervals,
            });
        }
    }
    Ok(records)
}

/// Sorts records by (dataset, framework, alpha, seed).
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.dataset
            .cmp(&b.dataset)
            .then(a.framework.cmp(&b.framework))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.seed.cmp(&b.seed))
    });
}

/// Runs every seed sequentially; see the `rulcp` crate for the parallel runner.
pub fn run_experiment(
    data: &ExperimentData,
    config: &ExperimentConfig,
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    for &seed in seeds {
        records.extend(run_seed(data, config, seed)?);
    }
    sort_records(&mut records);
    Ok(records)
}

/// Mean over seeds of one (dataset, framework, alpha) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub dataset: String,
    pub framework: Framework,
    pub alpha: f64,
    pub n_runs: usize,
    pub mean_coverage: f64,
    pub mean_width: f64,
    pub total_unbounded: usize,
}

/// Averages sorted records over seeds.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for r in records {
        let same = |c: &CellSummary| {
            c.dataset == r.dataset && c.framework == r.framework && c.alpha == r.alpha
        };
        if !out.last().is_some_and(same) {
            out.push(CellSummary {
                dataset: r.dataset.clone(),
                framework: r.framework,
                alpha: r.alpha,
                n_runs: 0,
                mean_coverage: 0.0,
                mean_width: 0.0,
                total_unbounded: 0,
            });
        }
        let c = out.last_mut().unwrap();
        c.n_runs += 1;
        c.mean_coverage += (r.stats.coverage - c.mean_coverage) / c.n_runs as f64;
        c.mean_width += (r.stats.mean_width - c.mean_width) / c.n_runs as f64;
        c.total_unbounded += r.stats.n_unbounded;
    }
    out
}

/// Repeated calibration/test redraws on synthetic exchangeable data with
/// base models fit once.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageStudy {
    pub n_train: usize,
    pub n_calib: usize,
    pub n_test: usize,
    pub redraws: usize,
    pub noise: Noise,
    pub seed: u64,
    pub frameworks: Vec<Framework>,
    pub alphas: Vec<f64>,
    pub weight_decay: f64,
    pub learners: LearnerSuite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSummary {
    pub framework: Framework,
    pub alpha: f64,
    pub mean_coverage: f64,
    pub mean_width: f64,
    pub mean_unbounded: f64,
}

pub fn coverage_study(study: &CoverageStudy) -> Result<Vec<CoverageSummary>> {
    let mut rng = ChaCha8Rng::seed_from_u64(study.seed);
    let train = synth_draw(study.n_train, study.noise, 0, &mut rng);
    let suite = FittedSuite::fit(
        &train,
        &study.learners,
        &study.frameworks,
        &study.alphas,
        study.seed,
    )?;
    let cells: Vec<(Framework, f64)> = study
        .frameworks
        .iter()
        .flat_map(|&f| study.alphas.iter().map(move |&a| (f, a)))
        .collect();
    let mut sums = alloc::vec![(0.0, 0.0, 0.0); cells.len()];
    for _ in 0..study.redraws {
        let calib = synth_draw(study.n_calib, study.noise, 0, &mut rng);
        let test = synth_draw(study.n_test, study.noise, 0, &mut rng);
        let targets: Vec<f64> = test.iter().map(|s| s.target).collect();
        for (sum, &(framework, alpha)) in sums.iter_mut().zip(&cells) {
            let predictor = suite.calibrate(framework, &calib, alpha, study.weight_decay)?;
            let stats = interval_stats(&predict_all(&predictor, &test)?, &targets);
            sum.0 += stats.coverage;
            sum.1 += stats.mean_width;
            sum.2 += stats.n_unbounded as f64;
        }
    }
    let r = study.redraws.max(1) as f64;
    Ok(cells
        .iter()
        .zip(sums)
        .map(|(&(framework, alpha), (c, w, u))| CoverageSummary {
            framework,
            alpha,
            mean_coverage: c / r,
            mean_width: w / r,
            mean_unbounded: u / r,
        })
        .collect())
}
