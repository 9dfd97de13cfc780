use std::path::PathBuf;

use crate::data::MonthIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("row {row}: {message}")]
    Ingest { row: usize, message: String },

    #[error(
        "duplicate observation for ({country}, {variable}, {date}) at rows {first} and {second}"
    )]
    Duplicate {
        country: String,
        variable: String,
        date: MonthIndex,
        first: usize,
        second: usize,
    },

    #[error("panel is not balanced: {} missing cell(s), first at ({}, {})", .missing.len(), .missing[0].0, .missing[0].1)]
    BalanceRequired { missing: Vec<(String, MonthIndex)> },

    #[error("unit {unit}: no observations inside the requested window")]
    EmptyWindow { unit: String },

    #[error("benchmark unit {0:?} is not present in the panel")]
    MissingBenchmark(String),

    #[error("missing value for unit {unit} at {date}")]
    MissingCell { unit: String, date: MonthIndex },

    #[error("singular design matrix: regressors are collinear")]
    Singular,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("covariate has zero variance")]
    DegenerateCovariate,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unit {unit}: {source}")]
    Unit {
        unit: String,
        #[source]
        source: Box<Error>,
    },

    #[error("cache file {path}: checksum mismatch")]
    Checksum { path: PathBuf },

    #[error(
        "cache file {path}: format version {found}, expected {expected}; regeneration required"
    )]
    CacheVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("cache file {path}: {message}")]
    CacheFormat { path: PathBuf, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_unit(self, unit: &str) -> Error {
        match self {
            e @ Error::Unit { .. } => e,
            e => Error::Unit {
                unit: unit.to_string(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
