use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution {0} must be a power of two and at least 16")]
    InvalidResolution(usize),

    #[error("fields live on different grids (n = {left} vs n = {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("mean mode |w_0| = {0:e} is not zero")]
    NonzeroMean(f64),

    #[error("L^p exponent p = {0} is below 1")]
    InvalidExponent(f64),

    #[error("BMO configuration: {0}")]
    InvalidBmoConfig(String),

    #[error("step control: {0}")]
    InvalidStepControl(String),

    #[error("time step collapsed to dt = {dt:e} < dt_min at t = {t}")]
    TimeStepCollapse { t: f64, dt: f64 },

    #[error("invalid run interval: {0}")]
    InvalidInterval(String),

    #[error("record times must be strictly increasing (sample {index})")]
    NonMonotoneTime { index: usize },

    #[error("at least two records are required, got {0}")]
    TooFewRecords(usize),

    #[error("initial value of {0} is zero; the bound is undefined")]
    ZeroInitialNorm(&'static str),

    #[error("scenario: {0}")]
    InvalidScenario(String),

    #[error("ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("diagnostic sink failed: {0}")]
    Sink(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
