use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set must contain at least one element")]
    EmptyGroundSet,

    #[error("set {set} contains index {index}, but the ground set has only {n} elements")]
    IndexOutOfRange { set: usize, index: usize, n: usize },

    #[error("set {set} is not strictly ascending at position {position}")]
    NotAscending { set: usize, position: usize },

    #[error("ground set sizes differ ({left} vs {right})")]
    GroundSetMismatch { left: usize, right: usize },

    #[error("subset of size {size} exceeds the shatter guard of {guard}; raise the guard to search it")]
    ShatterGuard { size: usize, guard: usize },

    #[error("parameter {name} = {value} must lie in the open interval (0, 1)")]
    ParameterRange { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample size {t} exceeds ground set size {n} when sampling without replacement")]
    SampleTooLarge { t: usize, n: usize },

    #[error("sample is empty (t = 0)")]
    EmptySample,

    #[error("sample is not contained in the enclosing sample")]
    NotContained,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("set is not a member of the family")]
    NotAMember,

    #[error("no verified sample after {attempts} attempts (best worst ratio {best_ratio})")]
    RetriesExhausted { attempts: usize, best_ratio: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
