use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter `{name}` out of range: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("time must be finite and non-negative, got {0}")]
    NegativeTime(f64),

    #[error("probability must lie in [0, 1), got {0}")]
    ProbabilityOutOfRange(f64),

    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("observation {index}: {reason}")]
    InvalidObservation { index: usize, reason: &'static str },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("model not identifiable: {0}")]
    Unidentified(&'static str),

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("objective is not finite in the finite-difference neighbourhood of coordinate {coordinate}")]
    NonFiniteNeighbourhood { coordinate: usize },

    #[error("censoring bound undefined: no susceptible subject drew a positive finite time")]
    NoCensoringBound,

    #[error("stratum `{0}` is empty")]
    EmptyStratum(String),

    #[error("grid point {t} outside [0, {max}]")]
    GridOutOfRange { t: f64, max: f64 },

    #[error("at least 2 replications required, got {0}")]
    TooFewReplications(usize),

    #[error("invalid optimizer controls: {0}")]
    InvalidControls(&'static str),
}
