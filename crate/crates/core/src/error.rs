use thiserror::Error;

use crate::model::{NodeIndex, Violation};

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum PbctError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient history: node {node} needs {needed} symbols, {available} supplied")]
    InsufficientHistory {
        node: NodeIndex,
        needed: usize,
        available: usize,
    },

    #[error("symbol {symbol} out of range for vocabulary of size {vocab_size}{}", line_suffix(*.line))]
    SymbolOutOfRange {
        symbol: u64,
        vocab_size: u32,
        line: Option<usize>,
    },

    #[error("unknown token {token:?} at line {line}")]
    UnknownToken { token: String, line: usize },

    #[error("corpus contains no sequences")]
    EmptyCorpus,

    #[error("test corpus has no scorable positions after a burn-in of {burn_in}")]
    NoScorablePositions { burn_in: usize },

    #[error("zero-probability event: symbol {symbol} at position {position} of sequence {sequence} (leaf {leaf})")]
    ZeroProbabilityEvent {
        sequence: usize,
        position: usize,
        symbol: u32,
        leaf: NodeIndex,
    },

    #[error("partitions cover different universes ({left} vs {right})")]
    MismatchedUniverse { left: u32, right: u32 },

    #[error("tree has no nodes at depth {depth}")]
    DepthUnavailable { depth: usize },

    #[error("invalid tree: {}", format_violations(.0))]
    InvalidTree(Vec<Violation>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersionMismatch { found: u32, expected: u32 },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PbctError {
    /// True for failures of the filesystem or stream layer.
    pub fn is_io(&self) -> bool {
        matches!(self, PbctError::Io(_))
    }
}

pub type Result<T, E = PbctError> = std::result::Result<T, E>;

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
