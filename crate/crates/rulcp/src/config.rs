//! Flat TOML run configuration.
//!
//! ```toml
//! dataset = "FD001"          # FD001..FD004, 1..4 or "synthetic"
//! data_dir = "data/CMAPSS"
//! frameworks = ["scp", "cqr"]
//! alphas = [0.1, 0.25]
//! n_seeds = 15
//! learner = "gradient_boosting"
//! n_iter = 100
//! ```
//!
//! Every key is optional. Relative paths resolve against the config file's
//! directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rulcp_core::cmapss::FeatureMode;
use rulcp_core::conformal::Framework;
use rulcp_core::eval::{
    ExperimentConfig, LearnerSuite, Noise, DEFAULT_ALPHAS, DEFAULT_CALIB_FRACTION, DEFAULT_N_SEEDS,
    DEFAULT_WEIGHT_DECAY,
};
use rulcp_core::models::{ForestParams, Loss, RegressorSpec};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: String,
    pub data_dir: Option<PathBuf>,
    pub features: String,
    pub frameworks: Vec<String>,
    pub alphas: Vec<f64>,
    pub n_seeds: u64,
    pub seed_base: u64,
    pub calib_fraction: f64,
    pub weight_decay: f64,
    /// Seed of the operating-mode clustering.
    pub prep_seed: u64,
    pub out_dir: PathBuf,

    pub learner: String,
    pub k: Option<f64>,
    pub n_trees: Option<f64>,
    pub n_iter: Option<f64>,
    pub learning_rate: Option<f64>,
    pub max_leaves: Option<f64>,
    pub max_depth: Option<f64>,
    pub min_samples_leaf: Option<f64>,
    pub min_samples_split: Option<f64>,
    pub max_bins: Option<f64>,
    /// Trees in the random forest fit to absolute residuals.
    pub sigma_trees: usize,

    pub synthetic_n_train: usize,
    pub synthetic_n_test: usize,
    pub synthetic_noise: String,
    pub synthetic_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: "FD001".into(),
            data_dir: None,
            features: "flat".into(),
            frameworks: Framework::ALL
                .iter()
                .map(|f| f.name().to_string())
                .collect(),
            alphas: DEFAULT_ALPHAS.to_vec(),
            n_seeds: DEFAULT_N_SEEDS,
            seed_base: 0,
            calib_fraction: DEFAULT_CALIB_FRACTION,
            weight_decay: DEFAULT_WEIGHT_DECAY,
            prep_seed: 0,
            out_dir: "results".into(),
            learner: "gradient_boosting".into(),
            k: None,
            n_trees: None,
            n_iter: None,
            learning_rate: None,
            max_leaves: None,
            max_depth: None,
            min_samples_leaf: None,
            min_samples_split: None,
            max_bins: None,
            sigma_trees: ForestParams::default().n_trees,
            synthetic_n_train: 2000,
            synthetic_n_test: 500,
            synthetic_noise: "heteroscedastic".into(),
            synthetic_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Cmapss {
        dataset_id: u8,
        data_dir: PathBuf,
        features: FeatureMode,
    },
    Synthetic {
        n_train: usize,
        n_test: usize,
        noise: Noise,
        seed: u64,
    },
}

impl DataSource {
    pub fn name(&self) -> String {
        match self {
            DataSource::Cmapss { dataset_id, .. } => format!("FD00{dataset_id}"),
            DataSource::Synthetic { .. } => "synthetic".into(),
        }
    }
}

/// A validated configuration ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub source: DataSource,
    pub experiment: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub prep_seed: u64,
    pub out_dir: PathBuf,
}

/// Accepts `FD001`, `fd001`, `1`.
pub fn parse_dataset_id(text: &str) -> Option<u8> {
    let digits = text
        .trim()
        .trim_start_matches(['F', 'f'])
        .trim_start_matches(['D', 'd']);
    match digits.parse::<u8>() {
        Ok(id @ 1..=4) => Some(id),
        _ => None,
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_err)
    }

    /// Reads and parses `path`, resolving relative paths against its folder.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadInput {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(dir) = &config.data_dir {
            config.data_dir = Some(base.join(dir));
        }
        config.out_dir = base.join(&config.out_dir);
        Ok(config)
    }

    fn hyperparameters(&self) -> BTreeMap<String, f64> {
        [
            ("k", self.k),
            ("n_trees", self.n_trees),
            ("n_iter", self.n_iter),
            ("learning_rate", self.learning_rate),
            ("max_leaves", self.max_leaves),
            ("max_depth", self.max_depth),
            ("min_samples_leaf", self.min_samples_leaf),
            ("min_samples_split", self.min_samples_split),
            ("max_bins", self.max_bins),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
    }

    pub fn plan(&self) -> Result<RunPlan> {
        let source = if self.dataset.eq_ignore_ascii_case("synthetic") {
            let noise = match self.synthetic_noise.as_str() {
                "homoscedastic" => Noise::Homoscedastic,
                "heteroscedastic" => Noise::Heteroscedastic,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown synthetic_noise `{other}`"
                    )))
                }
            };
            if self.synthetic_n_train < 2 || self.synthetic_n_test == 0 {
                return Err(CliError::Config("synthetic sizes too small".into()));
            }
            DataSource::Synthetic {
                n_train: self.synthetic_n_train,
                n_test: self.synthetic_n_test,
                noise,
                seed: self.synthetic_seed,
            }
        } else {
            let dataset_id = parse_dataset_id(&self.dataset)
                .ok_or_else(|| CliError::Config(format!("unknown dataset `{}`", self.dataset)))?;
            let data_dir = self.data_dir.clone().ok_or_else(|| {
                CliError::Config("data_dir is required for C-MAPSS datasets".into())
            })?;
            if !data_dir.is_dir() {
                return Err(CliError::Config(format!(
                    "data_dir {} does not exist",
                    data_dir.display()
                )));
            }
            let features = match self.features.as_str() {
                "flat" => FeatureMode::Flat,
                "windowed" => FeatureMode::Windowed,
                other => return Err(CliError::Config(format!("unknown features `{other}`"))),
            };
            DataSource::Cmapss {
                dataset_id,
                data_dir,
                features,
            }
        };

        let frameworks = self
            .frameworks
            .iter()
            .map(|name| name.parse::<Framework>().map_err(config_err))
            .collect::<Result<Vec<_>>>()?;
        let point =
            RegressorSpec::from_named(&self.learner, Loss::SquaredError, &self.hyperparameters())
                .map_err(config_err)?;
        if self.sigma_trees == 0 {
            return Err(CliError::Config("sigma_trees must be positive".into()));
        }
        let sigma = RegressorSpec::random_forest(ForestParams {
            n_trees: self.sigma_trees,
            ..ForestParams::default()
        });
        let experiment = ExperimentConfig {
            frameworks,
            alphas: self.alphas.clone(),
            calib_fraction: self.calib_fraction,
            weight_decay: self.weight_decay,
            learners: LearnerSuite {
                quantile: point.clone(),
                point,
                sigma,
            },
        };
        experiment.validate().map_err(config_err)?;
        if !(self.calib_fraction > 0.0 && self.calib_fraction < 1.0) {
            return Err(CliError::Config("calib_fraction outside (0, 1)".into()));
        }
        if self.n_seeds == 0 {
            return Err(CliError::Config("n_seeds must be positive".into()));
        }
        Ok(RunPlan {
            source,
            experiment,
            seeds: (self.seed_base..self.seed_base + self.n_seeds).collect(),
            prep_seed: self.prep_seed,
            out_dir: self.out_dir.clone(),
        })
    }
}
