use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("band index {j} outside resolvable range [{lo}, {hi}]")]
    OutOfRange { j: i32, lo: i32, hi: i32 },
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("method mismatch: {0}")]
    MethodMismatch(String),
    #[error("cost guard: {0}")]
    CostGuard(String),
    #[error("cutoff coverage failure at {point:?} (total weight {weight})")]
    Coverage { point: Vec<f64>, weight: f64 },
    #[error("positive floor violated: {0}")]
    PositiveFloor(String),
    #[error("unsupported phase: {0}")]
    UnsupportedPhase(String),
    #[error("instability at t={t}: {detail}")]
    Instability { t: f64, detail: String },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
