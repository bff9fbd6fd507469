use std::path::PathBuf;

use thiserror::Error;

use crate::game::GameId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("{game} does not support size parameter {size}")]
    UnsupportedSize { game: &'static str, size: u32 },
    #[error("operation requires a non-terminal history")]
    TerminalHistory,
    #[error("operation requires a terminal history")]
    NonTerminalHistory,
    #[error("operation requires a chance node")]
    NotChanceNode,
    #[error("operation is undefined at a chance node")]
    ChanceNode,
    #[error("history is not a decision node of player {0}")]
    NotPlayerNode(usize),
    #[error("action {action} is not legal here")]
    IllegalAction { action: usize },
    #[error("malformed information-set key {0}")]
    InvalidInfoSet(String),
    #[error("history does not belong to {0}")]
    ForeignHistory(GameId),

    #[error("invalid CFR variant `{0}`")]
    UnknownVariant(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("iteration counter must be at least 1 (got {0})")]
    InvalidIteration(u64),
    #[error("strategy weight must be non-negative (got {0})")]
    NegativeWeight(f64),

    #[error("policy returned a non-finite probability at {0}")]
    NonFinitePolicy(String),

    #[error("buffer is empty")]
    EmptyBuffer,
    #[error("buffer capacity {0} exceeded")]
    BufferOverflow(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: Box<Error>,
    },
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
}
