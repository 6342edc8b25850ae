//! Error types for data loading, results files, and ensemble construction.

use std::path::PathBuf;
use thiserror::Error;

/// Problems reading, validating or resampling time series data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed header: {message}")]
    MalformedHeader {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: could not parse value `{token}`")]
    BadValue {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("{path}:{line}: series has {found} values, expected {expected}")]
    RaggedSeries {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: label `{token}` is not in the declared class list")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("{path}: no data cases found")]
    Empty { path: PathBuf },
    #[error("invalid series set: {0}")]
    InvalidSet(String),
    #[error("resample fold must be >= 1, got {0}")]
    InvalidFold(usize),
    #[error("train and test sets disagree: {0}")]
    Mismatch(String),
    #[error("no train/test pair named `{name}` under {dir} (.ts or .csv)")]
    DatasetNotFound { dir: PathBuf, name: String },
}

/// Problems reading or validating classifier results files.
#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("results file not found: {path}")]
    Missing { path: PathBuf },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: stored accuracy {stored} does not match row accuracy {recomputed}")]
    AccuracyMismatch {
        path: PathBuf,
        stored: f64,
        recomputed: f64,
    },
    #[error("{path}:{line}: probability row sums to {sum}, expected 1")]
    BadProbabilitySum { path: PathBuf, line: usize, sum: f64 },
    #[error("invalid result: {0}")]
    Invalid(String),
}

/// Problems building or applying classifiers and the meta ensemble.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid training data: {0}")]
    InvalidData(String),
    #[error("series length {found} does not match the training length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("component `{name}` failed to build: {source}")]
    Component {
        name: String,
        #[source]
        source: Box<BuildError>,
    },
    #[error("all ensemble weights are zero")]
    AllWeightsZero,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Results(#[from] ResultsError),
}

/// Problems saving or loading build checkpoints.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a checkpoint file (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch {
        path: PathBuf,
        expected: u32,
        found: u32,
    },
    #[error("{path}: checkpoint is corrupted or truncated")]
    Corrupted { path: PathBuf },
}

/// Problems parsing a run specification or executing an experiment.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown flag `{0}`")]
    UnknownFlag(String),
    #[error("flag `{flag}`: {message}")]
    BadFlag { flag: String, message: String },
    #[error("missing required flags: {0}")]
    MissingFlags(String),
    #[error("unknown classifier `{0}` (expected one of TSF, RISE, cBOSS, STC, HC)")]
    UnknownClassifier(String),
    #[error("results path is not writable: {path}: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Results(#[from] ResultsError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
