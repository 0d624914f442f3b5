use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pricing engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path}: no observations")]
    NoObservations { path: PathBuf },
    #[error("duplicate date {date}")]
    DuplicateDate { date: String },
    #[error("invalid observation at position {index}: {message}")]
    InvalidObservation { index: usize, message: String },

    #[error("series too short: need at least {needed} observations, have {len}")]
    SeriesTooShort { needed: usize, len: usize },
    #[error("stride must be at least 1")]
    InvalidStride,
    #[error("need at least {needed} windows, have {found}")]
    TooFewWindows { needed: usize, found: usize },
    #[error("no viable stride in 1..={window_len}: {}", format_attempts(attempts))]
    NoViableStride {
        window_len: usize,
        attempts: Vec<StrideAttempt>,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training collapsed: {0}")]
    Collapse(String),

    #[error("not a checkpoint file")]
    NotCheckpoint,
    #[error("checkpoint format version {found} is newer than supported version {supported}")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("checkpoint truncated")]
    TruncatedCheckpoint,
    #[error("checkpoint checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("horizon exceeds generator window: payoff index {index} > window length {window}")]
    HorizonExceedsWindow { index: usize, window: usize },
    #[error("horizon of {steps} time units is not a whole number of steps")]
    NonIntegralHorizon { steps: f64 },
    #[error("no samples to average")]
    NoSamples,
    #[error("non-positive simulated price {value} in track {track}")]
    NonPositivePrice { track: usize, value: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("insufficient history: need {needed} rows, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("no rows in the {0} regime")]
    EmptyRegime(&'static str),
    #[error("input lies outside the {0} regime the pricer was fitted on")]
    RegimeMismatch(&'static str),

    #[error("actual value is zero at index {index}")]
    ZeroActual { index: usize },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Outcome of one stride probed during the stride search.
#[derive(Debug, Clone, PartialEq)]
pub struct StrideAttempt {
    pub stride: usize,
    pub windows: usize,
    /// `None` when the probe was skipped because the set was already too small.
    pub collapsed: Option<bool>,
}

fn format_attempts(attempts: &[StrideAttempt]) -> String {
    attempts
        .iter()
        .map(|a| match a.collapsed {
            Some(c) => format!("d={} size={} collapsed={}", a.stride, a.windows, c),
            None => format!("d={} size={} (below threshold)", a.stride, a.windows),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Wraps the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Stage name for errors produced by the pipeline.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// Process exit code: 1 for validation errors, 2 for runtime or numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Collapse(_)
            | Error::NoViableStride { .. }
            | Error::RankDeficient
            | Error::NonPositivePrice { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
