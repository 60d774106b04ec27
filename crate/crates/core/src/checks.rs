//! Built-in property suite behind `rulcp validate`.
//!
//! Each check returns a [`CheckOutcome`] instead of panicking so the CLI can
//! print a full report. The quantile check takes the implementation under
//! test as an argument, which lets tests feed it a deliberately broken one.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conformal::{
    calibrate_nex, calibrate_scp, calibrate_scp_nnm, CalibratedPredictor, Framework, SharedModel,
};
use crate::eval::{coverage_study, CoverageStudy, LearnerSuite, Noise};
use crate::models::{pinball_loss, BoostParams, FnRegressor, ForestParams, Loss};
use crate::quantile::{conformal_quantile, weighted_conformal_quantile, ScoreDistribution};
use crate::LabeledSample;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, failure: Option<String>, ok: String) -> Self {
        match failure {
            Some(detail) => Self {
                name,
                passed: false,
                detail,
            },
            None => Self {
                name,
                passed: true,
                detail: ok,
            },
        }
    }
}

/// `(scores, weights, alpha) -> quantile`.
pub type WeightedQuantileFn<'a> = &'a dyn Fn(&[f64], &[f64], f64) -> f64;

/// The library's weighted quantile in the shape the oracle check expects.
pub fn library_weighted_quantile(scores: &[f64], weights: &[f64], alpha: f64) -> f64 {
    let dist =
        ScoreDistribution::new(scores.to_vec(), Some(weights.to_vec())).expect("valid instance");
    weighted_conformal_quantile(&dist, alpha).expect("valid alpha")
}

/// Smallest candidate score whose cumulative normalized mass reaches
/// `1 - alpha`, with the leftover mass `1 / (1 + sum w)` parked at `+inf`.
/// Quadratic and sort-free on purpose.
pub fn brute_force_quantile(scores: &[f64], weights: &[f64], alpha: f64) -> f64 {
    let total: f64 = weights.iter().sum::<f64>() + 1.0;
    let mut best = f64::INFINITY;
    for &candidate in scores {
        let mass: f64 = scores
            .iter()
            .zip(weights)
            .filter(|(s, _)| **s <= candidate)
            .map(|(_, w)| w / total)
            .sum();
        if mass >= 1.0 - alpha - 1e-12 && candidate < best {
            best = candidate;
        }
    }
    best
}

const ALPHA_GRID: [f64; 10] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50];

fn random_instance(rng: &mut ChaCha8Rng, unit_weights: bool) -> (Vec<f64>, Vec<f64>, f64) {
    let n = rng.random_range(1..=10);
    // Integer-valued scores half the time, to exercise ties.
    let ties = rng.random_bool(0.5);
    let scores: Vec<f64> = (0..n)
        .map(|_| {
            if ties {
                rng.random_range(0..4) as f64
            } else {
                rng.random_range(0.0..10.0)
            }
        })
        .collect();
    let weights = (0..n)
        .map(|_| {
            if unit_weights {
                1.0
            } else {
                1.0 - rng.random::<f64>()
            }
        })
        .collect();
    let alpha = ALPHA_GRID[rng.random_range(0..ALPHA_GRID.len())];
    (scores, weights, alpha)
}

/// Compares `quantile` with [`brute_force_quantile`] on random weighted
/// instances, requiring exact equality.
pub fn check_quantile_oracle(
    quantile: WeightedQuantileFn<'_>,
    instances: usize,
    seed: u64,
) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    for i in 0..instances {
        let (scores, weights, alpha) = random_instance(&mut rng, false);
        let (got, want) = (
            quantile(&scores, &weights, alpha),
            brute_force_quantile(&scores, &weights, alpha),
        );
        if got != want {
            failure = Some(format!(
                "instance {i}: got {got}, oracle {want} (alpha {alpha}, scores {scores:?})"
            ));
            break;
        }
    }
    CheckOutcome::new(
        "quantile oracle equivalence",
        failure,
        format!("{instances} instances match"),
    )
}

/// Unit weights must reproduce the plain index rule bit for bit.
pub fn check_index_reduction(instances: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    for i in 0..instances {
        let (scores, weights, alpha) = random_instance(&mut rng, true);
        let got = library_weighted_quantile(&scores, &weights, alpha);
        let want = conformal_quantile(&scores, alpha).expect("valid instance");
        if got.to_bits() != want.to_bits() {
            failure = Some(format!("instance {i}: weighted {got}, index rule {want}"));
            break;
        }
    }
    CheckOutcome::new(
        "index-rule reduction",
        failure,
        format!("{instances} instances match"),
    )
}

fn toy_problem(seed: u64) -> (SharedModel, Vec<LabeledSample>, Vec<LabeledSample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<LabeledSample> {
        (0..n)
            .map(|i| {
                let x = rng.random_range(0.0..10.0);
                let y = 3.0 * x + rng.random_range(-2.0..2.0) * (1.0 + x);
                LabeledSample::new(vec![x], y, i as u32, rng.random_range(1..=300))
            })
            .collect()
    };
    let (calib, test) = (draw(200), draw(100));
    (
        Arc::new(FnRegressor::new(1, |x: &[f64]| 3.0 * x[0])),
        calib,
        test,
    )
}

fn bounds(p: &CalibratedPredictor, test: &[LabeledSample]) -> Vec<(f64, f64)> {
    test.iter()
        .map(|s| {
            let iv = p
                .predict_interval(&s.features, Some(s.cycle_index))
                .expect("valid input");
            (iv.raw_lower, iv.raw_upper)
        })
        .collect()
}

fn constant(c: f64) -> SharedModel {
    Arc::new(FnRegressor::new(1, move |_: &[f64]| c))
}

/// nex with decay 1 equals SCP; NNM with a constant `sigma` equals SCP;
/// NNM is invariant to rescaling `sigma`.
pub fn check_reductions(seed: u64) -> Vec<CheckOutcome> {
    let (model, calib, test) = toy_problem(seed);
    let mut out = Vec::new();
    let mut nex_fail = None;
    let mut nnm_fail = None;
    let mut scale_fail = None;
    for alpha in [0.05, 0.1, 0.25, 0.5] {
        let scp = bounds(&calibrate_scp(model.clone(), &calib, alpha).unwrap(), &test);
        let nex = bounds(
            &calibrate_nex(model.clone(), &calib, alpha, 1.0, None).unwrap(),
            &test,
        );
        if nex_fail.is_none() && scp != nex {
            nex_fail = Some(format!(
                "alpha {alpha}: nex-SCP with decay 1 differs from SCP"
            ));
        }
        for c in [1.0, 0.5, 4.0] {
            let nnm = bounds(
                &calibrate_scp_nnm(model.clone(), constant(c), &calib, alpha).unwrap(),
                &test,
            );
            if nnm_fail.is_none() && nnm != scp {
                nnm_fail = Some(format!(
                    "alpha {alpha}: constant sigma {c} differs from SCP"
                ));
            }
        }
        let sigma: SharedModel = Arc::new(FnRegressor::new(1, |x: &[f64]| 1.0 + x[0]));
        let scaled: SharedModel = Arc::new(FnRegressor::new(1, |x: &[f64]| 3.7 * (1.0 + x[0])));
        let a = bounds(
            &calibrate_scp_nnm(model.clone(), sigma, &calib, alpha).unwrap(),
            &test,
        );
        let b = bounds(
            &calibrate_scp_nnm(model.clone(), scaled, &calib, alpha).unwrap(),
            &test,
        );
        let close = |u: f64, v: f64| (u - v).abs() <= 1e-9 * u.abs().max(1.0);
        if scale_fail.is_none()
            && !a
                .iter()
                .zip(&b)
                .all(|(p, q)| close(p.0, q.0) && close(p.1, q.1))
        {
            scale_fail = Some(format!("alpha {alpha}: rescaled sigma moves the interval"));
        }
    }
    out.push(CheckOutcome::new(
        "nex-SCP at decay 1 equals SCP",
        nex_fail,
        "bitwise equal".into(),
    ));
    out.push(CheckOutcome::new(
        "NNM with constant sigma equals SCP",
        nnm_fail,
        "bitwise equal".into(),
    ));
    out.push(CheckOutcome::new(
        "NNM invariant to sigma scale",
        scale_fail,
        "within 1e-9".into(),
    ));
    out
}

/// Mean pinball loss of `c` over `values`.
fn empirical_pinball(tau: f64, values: &[f64], c: f64) -> f64 {
    values.iter().map(|&y| pinball_loss(tau, y, c)).sum::<f64>() / values.len() as f64
}

/// The pinball leaf value must be no worse than any candidate: every data
/// point and every midpoint between neighbours.
pub fn check_pinball_leaf(instances: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    'outer: for i in 0..instances {
        let n = rng.random_range(1..=20);
        let values: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..30) as f64 * 0.5)
            .collect();
        for tau in [0.1, 0.5, 0.9] {
            let leaf = Loss::Pinball(tau).optimal_constant(&mut values.clone());
            let leaf_loss = empirical_pinball(tau, &values, leaf);
            let mut candidates = values.clone();
            candidates.extend(values.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            if let Some(&c) = candidates
                .iter()
                .find(|&&c| empirical_pinball(tau, &values, c) < leaf_loss - 1e-12)
            {
                failure = Some(format!(
                    "instance {i}, tau {tau}: leaf {leaf} beaten by {c}"
                ));
                break 'outer;
            }
        }
    }
    CheckOutcome::new(
        "pinball leaf optimality",
        failure,
        format!("{instances} multisets x 3 levels"),
    )
}

/// Coverage bands checked by [`check_coverage`]: `(alpha, low, high)`.
pub const COVERAGE_BANDS: [(f64, f64, f64); 2] = [(0.10, 0.89, 0.93), (0.25, 0.74, 0.78)];

/// The coverage study used by the acceptance suite and, with fewer redraws,
/// by `validate`.
pub fn coverage_study_config(redraws: usize, seed: u64) -> CoverageStudy {
    CoverageStudy {
        n_train: 2000,
        n_calib: 500,
        n_test: 500,
        redraws,
        noise: Noise::Heteroscedastic,
        seed,
        frameworks: vec![Framework::Scp, Framework::ScpNnm, Framework::Cqr],
        alphas: COVERAGE_BANDS.iter().map(|b| b.0).collect(),
        weight_decay: 1.0,
        learners: LearnerSuite::gradient_boosting(
            BoostParams {
                n_iter: 50,
                ..BoostParams::default()
            },
            ForestParams {
                n_trees: 50,
                ..ForestParams::default()
            },
        ),
    }
}

/// Monte Carlo coverage of scp, scp_nnm and cqr on synthetic i.i.d. data.
pub fn check_coverage(redraws: usize, seed: u64) -> CheckOutcome {
    let summaries = match coverage_study(&coverage_study_config(redraws, seed)) {
        Ok(s) => s,
        Err(e) => {
            return CheckOutcome::new("coverage Monte Carlo", Some(format!("{e}")), String::new())
        }
    };
    let mut detail = String::new();
    let mut failure = None;
    for s in &summaries {
        let (_, lo, hi) = COVERAGE_BANDS
            .iter()
            .find(|b| b.0 == s.alpha)
            .copied()
            .expect("band");
        detail.push_str(&format!(
            "{}@{}={:.4} ",
            s.framework, s.alpha, s.mean_coverage
        ));
        if !(lo..=hi).contains(&s.mean_coverage) && failure.is_none() {
            failure = Some(format!(
                "{} at alpha {}: coverage {:.4} outside [{lo}, {hi}]",
                s.framework, s.alpha, s.mean_coverage
            ));
        }
    }
    CheckOutcome::new(
        "coverage Monte Carlo",
        failure,
        String::from(detail.trim_end()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    pub seed: u64,
    pub instances: usize,
    pub coverage_redraws: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 1000,
            coverage_redraws: 50,
        }
    }
}

/// Runs the whole suite; a zero redraw count skips the coverage study.
pub fn run_all(options: &ValidateOptions) -> Vec<CheckOutcome> {
    let mut out = vec![
        check_quantile_oracle(&library_weighted_quantile, options.instances, options.seed),
        check_index_reduction(options.instances, options.seed.wrapping_add(1)),
    ];
    out.extend(check_reductions(options.seed));
    out.push(check_pinball_leaf(
        options.instances / 2,
        options.seed.wrapping_add(2),
    ));
    if options.coverage_redraws > 0 {
        out.push(check_coverage(options.coverage_redraws, options.seed));
    }
    out
}
