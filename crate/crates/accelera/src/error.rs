use thiserror::Error;

/// Errors surfaced by the analysis pipeline, each tagged with enough
/// context to map it to a CLI diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by an interval containing zero")]
    DivisionByZero,

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("unbounded set in direction: {0}")]
    Unbounded(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("divergent geometric sum: {0}")]
    Divergence(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("analysis failed in stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
