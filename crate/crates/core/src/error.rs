use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopicError {
    #[error("topic is empty")]
    Empty,
    #[error("topic {0:?} must start with '/'")]
    MissingLeadingSlash(String),
    #[error("topic {0:?} must not end with '/'")]
    TrailingSlash(String),
    #[error("topic {0:?} contains an empty segment")]
    EmptySegment(String),
    #[error("topic {0:?} contains a control character")]
    ControlCharacter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid time range: t0 {t0} > t1 {t1}")]
pub struct InvalidRange {
    pub t0: u64,
    pub t1: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("no topics could be placed in the sensor tree ({} rejected)", rejected.len())]
    Empty { rejected: Vec<Rejection> },
    #[error("invalid hierarchy pattern {pattern:?}: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error("hierarchy specification has no levels")]
    NoLevels,
}

/// A topic that could not be placed in the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub topic: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ExprParseError {
    /// 1-based character column in the expression text.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("output expressions match no node in the sensor tree")]
    EmptyOutputDomain,
    #[error("no block could be built: {}", format_skips(.skipped))]
    NoBlocks { skipped: Vec<SkippedBlock> },
    #[error("block template has no output expressions")]
    NoOutputs,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SkippedBlock {
    pub name: String,
    pub reason: String,
}

fn format_skips(skipped: &[SkippedBlock]) -> String {
    skipped
        .iter()
        .map(|s| format!("{} ({})", s.name, s.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown sensor {0}")]
    UnknownSensor(String),
    #[error(transparent)]
    InvalidRange(#[from] InvalidRange),
    #[error("no job source is bound")]
    JobsUnavailable,
    #[error("storage failure: {0}")]
    Storage(String),
}

/// Error from the configuration text parser, with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfError {
    pub line: usize,
    pub message: String,
}

impl ConfError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ConfError {
            line,
            message: message.into(),
        }
    }
}
