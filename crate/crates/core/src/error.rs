use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("arrangement has {count} vertices, above the cap of {cap}; {hint}")]
    Capacity { count: usize, cap: usize, hint: String },

    #[error("cutting construction failed after {attempts} attempts")]
    Construction { attempts: usize },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("internal diagnostic: {0}")]
    Diagnostic(String),

    #[error("instance generation failed: {0}")]
    Generation(String),
}

impl Error {
    /// True for errors that mean the input broke a stated promise rather
    /// than the code misbehaving.
    pub fn is_assumption(&self) -> bool {
        matches!(self, Error::Assumption(_) | Error::Generation(_))
    }
}
