use crate::graph::NodeId;

/// Errors produced by graph construction, parsing, the engine and the oracles.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node ids must be positive")]
    ZeroId,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("already stable: no rule is enabled")]
    AlreadyStable,
    #[error("graph has {n} nodes but the enumeration cap is {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("invalid algorithm stack: {0}")]
    InvalidStack(String),
    #[error("node sets do not match: {0}")]
    NodeSetMismatch(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("trace replay failed at step {step}: {message}")]
    Replay { step: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
