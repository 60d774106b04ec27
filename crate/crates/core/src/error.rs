use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("miscoverage rate must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("weight {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("weight count {weights} does not match score count {scores}")]
    WeightCount { scores: usize, weights: usize },
    #[error("weighted calibration requires a cycle index for {0}")]
    MissingCycleIndex(&'static str),
    #[error("cycle {t} outside 1..={failure_time}")]
    CycleOutOfRange { t: u32, failure_time: u32 },
    #[error("{source_name} line {line}: {message}")]
    Parse {
        source_name: &'static str,
        line: usize,
        message: String,
    },
    #[error("unit {unit}: expected cycle {expected}, found {found}")]
    NonContiguousCycles {
        unit: u32,
        expected: u32,
        found: u32,
    },
    #[error("{rul} RUL values for {units} test units")]
    RulCountMismatch { units: usize, rul: usize },
    #[error("invalid unit {unit}: {message}")]
    InvalidUnit { unit: u32, message: String },
    #[error("need at least {k} distinct rows, found {distinct}")]
    TooFewDistinctRows { k: usize, distinct: usize },
    #[error("operating mode {0} has no training rows")]
    UnseenMode(usize),
    #[error("split leaves an empty {0} set")]
    EmptySplit(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
