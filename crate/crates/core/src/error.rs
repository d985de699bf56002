//! Error types shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Coarse failure class, used by the CLI to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or arguments.
    Usage,
    /// Malformed, missing, or physically invalid input data.
    Data,
    /// A numerical procedure failed (divergence, rank deficiency, ...).
    Numeric,
}

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("{path}: expected header `{expected}`, found `{found}`")]
    HeaderMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("negative label at row {row}: insertion_loss_db = {value}")]
    NegativeLabel { row: usize, value: f64 },

    #[error("row {row}, column `{column}`: value {value} violates `{constraint}`")]
    InvalidValue {
        row: usize,
        column: String,
        value: f64,
        constraint: String,
    },

    #[error("dataset `{name}` is empty")]
    EmptyDataset { name: String },

    #[error("cannot fit scaler: feature `{feature}` is constant (min == max == {value})")]
    ConstantFeature { feature: String, value: f64 },

    #[error("scaler mismatch: expected features [{expected}], found [{found}]")]
    ScalerMismatch { expected: String, found: String },

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("negative frequency: {0} GHz")]
    NegativeFrequency(f64),

    #[error("rank-deficient design matrix: {0}")]
    RankDeficient(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no fittable curves: {0}")]
    NoFittableCurves(String),

    #[error("model file {path}: {detail}")]
    ModelFormat { path: PathBuf, detail: String },
}

impl Error {
    /// Classify the error for exit-code mapping.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) => ErrorClass::Usage,
            Error::NonFinite(_)
            | Error::Diverged { .. }
            | Error::RankDeficient(_)
            | Error::Numerical(_)
            | Error::NoFittableCurves(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
