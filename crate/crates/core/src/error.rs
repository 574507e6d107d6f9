//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of two inputs do not line up (e.g. network dimension vs data).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A dataset with zero rows was supplied where at least one is required.
    #[error("empty dataset")]
    EmptyDataset,

    /// A configuration value violates its documented precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A numeric degeneracy (zero variance, overflow, perfect fit) that the
    /// caller must handle explicitly rather than receive a silent NaN.
    #[error("numeric degeneracy: {0}")]
    Degenerate(String),

    /// The design matrix is rank deficient at the configured threshold.
    #[error("rank-deficient design matrix")]
    RankDeficient,

    /// A named column is absent from the input file.
    #[error("missing column: {0}")]
    MissingColumn(String),

    /// A cell could not be parsed as a number.
    #[error("bad cell at data row {row}, column {column}: {message}")]
    BadCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
