use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A malformed decimal or rational literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed number {token:?} at position {position}: {reason}")]
pub struct ParseError {
    /// The whole literal that failed to parse.
    pub token: String,
    /// Byte offset of the offending character inside `token`.
    pub position: usize,
    pub reason: &'static str,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{op}: dimension mismatch ({left} vs {right})")]
    DimensionMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{0} must be non-empty")]
    Empty(&'static str),

    #[error("matrix row {row} has {found} entries, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, found: usize },

    #[error("layer {next} expects {expected} inputs but layer {prev} produces {found}")]
    LayerChain {
        prev: usize,
        next: usize,
        expected: usize,
        found: usize,
    },

    #[error("division by non-positive scale {0}")]
    NonPositiveDivisor(String),

    #[error("square root of negative value {0}")]
    NegativeSqrt(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid output pair ({i}, {k}) for output dimension {dim}")]
    InvalidPair { i: usize, k: usize, dim: usize },

    #[error("perturbation bound must be nonnegative, got {0}")]
    NegativeEpsilon(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid bounds table: {0}")]
    InvalidBounds(String),

    #[error("{}:{line}:{column}: {source}", path_display(.path))]
    ModelLiteral {
        path: Option<PathBuf>,
        line: usize,
        column: usize,
        source: ParseError,
    },

    #[error("{}: layer {layer} (line {line}) {reason}", path_display(.path))]
    ModelFormat {
        path: Option<PathBuf>,
        layer: usize,
        line: usize,
        reason: String,
    },

    #[error("{}:{line}: {reason}", path_display(.path))]
    BoundsFormat {
        path: Option<PathBuf>,
        line: usize,
        reason: String,
    },

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn path_display(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => p.display().to_string(),
        None => "<input>".to_string(),
    }
}
