use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the cascade pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("input is empty")]
    EmptyInput,

    #[error("document `{0}` has no gold label")]
    MissingGold(String),

    #[error("label space needs at least 2 labels, found {0}")]
    TooFewLabels(usize),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("label name must be non-empty")]
    EmptyLabelName,

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("confidence {0} is outside [0, 1]")]
    ConfidenceOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("document `{0}` has empty text")]
    EmptyText(String),

    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("all paired differences are identical; the t statistic is undefined")]
    DegenerateVariance,

    #[error("invalid regex in rule `{rule_id}`: {source}")]
    InvalidRule {
        rule_id: String,
        #[source]
        source: regex::Error,
    },

    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("document `{id}`: {source}")]
    Document {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_document(self, id: &str) -> Self {
        Error::Document {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
