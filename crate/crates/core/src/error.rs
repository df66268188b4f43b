use std::path::PathBuf;

use crate::model::Channel;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid rating {0}: must be finite and within [1, 9]")]
    InvalidRating(f64),

    #[error("dataset is empty after exclusions")]
    EmptyDataset,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid band {low_hz}-{high_hz} Hz: {reason}")]
    InvalidBand {
        low_hz: f64,
        high_hz: f64,
        reason: String,
    },

    #[error("no beats detected ({0})")]
    EmptyBeats(BeatDiagnostics),

    #[error("insufficient beats: {0}")]
    InsufficientBeats(String),

    #[error("missing channel {0}")]
    MissingChannel(Channel),

    #[error("fisher score undefined: {0}")]
    UndefinedScore(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("shape mismatch: expected {expected} features, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("nothing to evaluate")]
    EmptyEval,

    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),

    #[error("subject {0}: every fold failed")]
    SubjectEval(String),

    #[error("insufficient subjects: need at least 2, got {0}")]
    InsufficientSubjects(usize),

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("synthetic spec: {0}")]
    Spec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}

/// What a detector saw when it gave up: used to tell a flat line from a noisy one.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatDiagnostics {
    pub detector: &'static str,
    pub samples: usize,
    pub candidates: usize,
    pub signal_std: f64,
}

impl std::fmt::Display for BeatDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} samples, {} candidates, std {:.3e}",
            self.detector, self.samples, self.candidates, self.signal_std
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
