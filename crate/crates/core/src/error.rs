use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::BlockId;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum Error {
    #[error("unknown parent block {0}")]
    UnknownParent(BlockId),
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("time {time} is not after the previous block time {last}")]
    NonMonotoneTime { time: f64, last: f64 },
    #[error("invalid rate: {0}")]
    InvalidRate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("population exceeded the safety cap of {cap} blocks")]
    PopulationOverflow { cap: usize },
    #[error("malformed schedule: {0}")]
    MalformedSchedule(String),
    #[error("strategy violation: {0}")]
    StrategyViolation(String),
    #[error("target honest block {target_j} was never mined")]
    TargetNeverMined { target_j: usize },
    #[error("strategy does not support this model: {0}")]
    ModelMismatch(String),
    #[error("index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("parameters outside the sub-threshold regime: {0}")]
    OutOfRegime(String),
    #[error("search budget of {budget} states exceeded")]
    SearchBudgetExceeded { budget: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
