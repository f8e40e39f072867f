use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("degenerate law: variance is zero, normalizing constant undefined")]
    DegenerateLaw,
    #[error("law has infinite variance, normalizing constant undefined")]
    InfiniteVariance,
    #[error("moment order must exceed 2, got {0}")]
    InvalidMomentOrder(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("path exceeded {cap} events before reaching horizon {horizon}")]
    RunawayPath { cap: u64, horizon: f64 },
    #[error("query time {t} beyond path horizon {horizon}")]
    QueryBeyondHorizon { t: f64, horizon: f64 },
    #[error("path horizon {horizon} too short for n*t = {needed}")]
    HorizonTooShort { needed: f64, horizon: f64 },
    #[error("need {needed} draws, only {available} available")]
    InsufficientDraws { needed: usize, available: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("increments overlap: ({s1}, {t1}) and ({s2}, {t2})")]
    OverlappingIncrements { s1: f64, t1: f64, s2: f64, t2: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
