use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot band a missing grade")]
    MissingGrade,

    #[error("invalid grade value {0}: expected 1..=9 or -1")]
    InvalidGrade(i64),

    #[error("grade estimate is not finite: {0}")]
    NonFinite(f64),

    #[error("invalid gender code {0}: expected 1 (female) or 2 (male)")]
    InvalidGender(i64),

    #[error("invalid region code {0}: expected 1..=6")]
    InvalidRegion(i64),

    #[error("invalid target index {0}: expected 1..=4")]
    InvalidTarget(i64),

    #[error("invalid case id {0}: expected a positive integer")]
    InvalidCaseId(i64),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row}: {message}")]
    MalformedRow { row: u64, message: String },

    #[error("unexpected header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("insufficient cohort: need at least {needed} training rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("empty training set")]
    EmptyTraining,

    #[error("no neighbors within the configured radius")]
    NoNeighbors,

    #[error("size out of range: {0}")]
    SizeOutOfRange(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {actual} actual grades vs {predicted} predictions")]
    LengthMismatch { actual: usize, predicted: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("case {case_id} refused: {reason}")]
    Refused { case_id: u64, reason: String },

    #[error("unknown case id {0}")]
    UnknownCase(u64),

    #[error("case id {0} already in use")]
    IdCollision(u64),

    #[error("repetition {rep} failed: {source}")]
    Repetition {
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}
