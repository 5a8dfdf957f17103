//! Error type shared by every module of the crate.

use chrono::NaiveDate;
use thiserror::Error;

/// Coarse error category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    DataGap,
    Config,
    Domain,
}

#[derive(Debug, Error)]
pub enum FundingError {
    /// A tenor, time or parameter outside the admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Roll length does not exceed the buffer, so a roll could never progress.
    #[error("buffer violation: roll length {alpha} must exceed buffer {delta} unless it covers the horizon {horizon}")]
    BufferViolation { alpha: f64, delta: f64, horizon: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// No usable curve observation for a date the computation depends on.
    #[error("data gap at {date}: {reason}")]
    DataGap { date: NaiveDate, reason: String },

    /// A curve provider could not supply a forward rate.
    #[error("measure error: {0}")]
    Measure(String),

    /// Sample with zero variance where a test statistic needs a spread.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {source_name}{}: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Parse {
        source_name: String,
        line: Option<u64>,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FundingError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            FundingError::Parse { .. } | FundingError::Io { .. } => ErrorCategory::Parse,
            FundingError::DataGap { .. } => ErrorCategory::DataGap,
            FundingError::Config(_) => ErrorCategory::Config,
            FundingError::Domain(_)
            | FundingError::BufferViolation { .. }
            | FundingError::InsufficientData(_)
            | FundingError::Measure(_)
            | FundingError::DegenerateSample(_) => ErrorCategory::Domain,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FundingError::Domain(msg.into())
    }

    pub(crate) fn gap(date: NaiveDate, reason: impl Into<String>) -> Self {
        FundingError::DataGap {
            date,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = FundingError> = std::result::Result<T, E>;
