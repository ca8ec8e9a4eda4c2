use std::fmt;

use thiserror::Error;

/// 1-based position in a text document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A text document (structure DSL, CML) is not well-formed.
    #[error("{location}: {message}")]
    Syntax { location: Location, message: String },

    /// A JSON document is well-formed but violates the contract. `path`
    /// points at the offending element, e.g. `functionalities[2].trace[0]`.
    #[error("{path}: {message}")]
    Contract { path: String, message: String },

    #[error("duplicate entity `{0}`")]
    DuplicateEntity(String),

    #[error("duplicate field `{field}` in entity `{entity}`")]
    DuplicateField { entity: String, field: String },

    #[error("entity `{0}` declares more than one inheritance reference")]
    MultipleInheritance(String),

    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),

    #[error("invalid similarity weights: {0}")]
    InvalidWeights(String),

    #[error("cannot cut {entities} entities into {requested} clusters")]
    InvalidClusterCount { requested: usize, entities: usize },

    #[error("entity `{0}` is not assigned to any cluster")]
    UnmappedEntity(String),

    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),

    #[error("unknown functionality `{0}`")]
    UnknownFunctionality(String),

    #[error("unknown bounded context `{0}`")]
    UnknownContext(String),

    #[error("unknown coordination `{0}`")]
    UnknownCoordination(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{0}")]
    InvalidArgument(String),

    /// An internal invariant did not hold on produced output.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
