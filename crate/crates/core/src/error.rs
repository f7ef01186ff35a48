use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a finite number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("dataset is empty")]
    Empty,

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid sample weights: {0}")]
    InvalidWeights(String),

    #[error("split on feature {feature} at {threshold} leaves one child empty")]
    DegenerateSplit { feature: usize, threshold: f64 },

    #[error("feature index {feature} out of range for {dim}-dimensional input")]
    DimensionMismatch { feature: usize, dim: usize },

    #[error("input has {found} features, model expects {expected}")]
    SchemaMismatch { found: usize, expected: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed model document: {0}")]
    Model(#[from] serde_json::Error),

    #[error("boosting failed: first weak learner has weighted error {error} >= {limit}")]
    WeakLearnerTooWeak { error: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
