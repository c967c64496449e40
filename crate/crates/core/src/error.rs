//! Error type shared across the library.

use std::path::PathBuf;

use thiserror::Error;

use crate::search::SearchRound;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },

    #[error("point {index} is tagged 2D but has nonzero z")]
    NonZeroZIn2d { index: usize },

    #[error("dataset has {n} points; k = {k} needs at least {} points", k + 1)]
    DatasetTooSmall { n: usize, k: usize },

    #[error("invalid search configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("refit radius {new} is below the current radius {current}; the tree only grows")]
    ShrinkingRefit { new: f64, current: f64 },

    #[error("every sampled neighbor distance is zero; dataset is degenerate")]
    DegenerateDataset,

    /// Carries the round log gathered before the limit was hit.
    #[error("round limit {limit} reached with {unresolved} queries unresolved")]
    MaxRoundsExceeded {
        limit: usize,
        unresolved: usize,
        rounds: Vec<SearchRound>,
    },

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    CsvFile { path: String, reason: String },

    #[error("{path}: row {row}, column {column}: {reason}")]
    CsvField {
        path: String,
        row: u64,
        column: String,
        reason: String,
    },
}
