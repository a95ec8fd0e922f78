use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ragged series at line {line}: expected {expected} values, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid tree structure: {0}")]
    InvalidTree(String),

    #[error("label space mismatch: {0}")]
    LabelSpaceMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("classifier error: {0}")]
    Classifier(String),

    #[error("series length mismatch: model expects {expected}, input has {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("scoring error: {0}")]
    Scoring(String),

    #[error("class set of size {size} exceeds the exhaustive split cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("class {class} has {count} instances, fewer than the {folds} folds requested")]
    FoldFeasibility {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("node {parent} has no training instances on its {side} side")]
    EmptyNode { parent: usize, side: &'static str },

    #[error("number of classes {0} is outside the supported range")]
    OutOfRange(usize),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("length mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
