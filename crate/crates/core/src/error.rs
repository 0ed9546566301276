use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A field-level invariant violation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ValidationError {
    pub field: String,
    pub reason: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Where a series entry came from: a line of a CSV file or an index into an in-memory list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Line(usize),
    Entry(usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Line(n) => write!(f, "line {n}"),
            Position::Entry(n) => write!(f, "entry {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("missing header row")]
    MissingHeader,
    #[error("header has no `{column}` column")]
    MissingColumn { column: String },
    #[error("series has no data rows")]
    Empty,
    #[error("{at}: malformed record: {message}")]
    Malformed { at: Position, message: String },
    #[error("{at}: `{value}` is not an integer year")]
    BadYear { at: Position, value: String },
    #[error("{at}: `{value}` is not a finite decimal number")]
    BadNumber { at: Position, value: String },
    #[error("{at}: duplicate year {year}")]
    DuplicateYear { at: Position, year: i32 },
    #[error("{at}: year {year} is out of order")]
    OutOfOrder { at: Position, year: i32 },
    #[error("{at}: year gap, {missing} is missing")]
    YearGap { at: Position, missing: i32 },
    #[error("no value for year {year}")]
    MissingYear { year: i32 },
    #[error("{series} series does not cover years {}", join_years(.missing))]
    CoverageGap { series: String, missing: Vec<i32> },
}

fn join_years(years: &[i32]) -> String {
    years
        .iter()
        .map(i32::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{}: {source}", .path.display())]
    SeriesFile { path: PathBuf, source: SeriesError },
    #[error("{}: {message}", .path.display())]
    Config { path: PathBuf, message: String },
    #[error("cannot read {}: {source}", .path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", .path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("replication with seed {seed} failed: {source}")]
    Replication { seed: u64, source: Box<Error> },
}

impl Error {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Series(_)
            | Error::SeriesFile { .. }
            | Error::Config { .. }
            | Error::Read { .. } => 1,
            Error::Write { .. } | Error::Calibration(_) | Error::Replication { .. } => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
