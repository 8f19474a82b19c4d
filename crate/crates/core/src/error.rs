use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{pred}` has arity {expected}, got {found} arguments")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("malformed formula: {0}")]
    Structure(String),
    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("solver gave up: {0}")]
    Unknown(String),
    #[error("model enumeration refused: {vars} variables exceeds the limit of {limit}")]
    EnumerationGuard { vars: usize, limit: usize },
    #[error("source id {0} does not occur in the problem")]
    UnknownSource(u32),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("merge failed: {0}")]
    Merge(String),
    #[error("ladder aborted at stage {stage}: {failed} of {total} merges failed")]
    LadderAbort {
        stage: usize,
        failed: usize,
        total: usize,
    },

    #[error("haystack: {0}")]
    Haystack(String),
    #[error("padding corpus too small: need {needed} sentences, have {available}")]
    CorpusTooSmall { needed: usize, available: usize },
    #[error("no usable sentences in padding corpus")]
    EmptyCorpus,

    #[error("dataset schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error("gold set is empty")]
    EmptyGold,

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
