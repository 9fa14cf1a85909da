use std::fmt;

use thiserror::Error;

use crate::data::Group;

/// Why an NPPR estimate could not be produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationFailure {
    /// One group has no events, or every event of one group precedes every
    /// event of the other, so the restricted event-time set is empty.
    EmptyTimeSet,
    /// The restricted set was non-empty but every time had an unusable weight.
    AllTimesDropped { dropped: usize },
}

impl fmt::Display for EstimationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimationFailure::EmptyTimeSet => write!(f, "restricted event-time set is empty"),
            EstimationFailure::AllTimesDropped { dropped } => {
                write!(f, "all {dropped} event times had undefined variance weights")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Input row violating an `Observation` invariant. Rows are numbered from 1,
    /// excluding any header.
    #[error("{message} at row {row}")]
    Validation { row: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset has no observations in the {0} group")]
    EmptyGroup(Group),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("estimation failed: {0}")]
    Estimation(EstimationFailure),

    #[error("only {n_effective} of {n_resamples} bootstrap resamples produced an estimate")]
    Bootstrap { n_effective: usize, n_resamples: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("censoring rate {target} cannot be reached: {reason}")]
    Calibration { target: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<EstimationFailure> for Error {
    fn from(value: EstimationFailure) -> Self {
        Error::Estimation(value)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
