use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// CSV is missing a required column or has an unusable header.
    #[error("schema error: {0}")]
    Schema(String),

    /// A row failed to parse; carries the 1-based line number.
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    /// A cell held a token outside the domain (e.g. an unknown lithotype).
    #[error("line {line}: invalid value: {message}")]
    Value { line: u64, message: String },

    /// An operation received an empty well.
    #[error("well '{0}' has no samples")]
    EmptyWell(String),

    /// A configuration value violated its invariant.
    #[error("invalid config: {0}")]
    Config(String),

    /// Model training could not proceed.
    #[error("training error: {0}")]
    Fit(String),

    /// A prediction input did not match the model's feature layout.
    #[error("shape error: {0}")]
    Shape(String),

    /// A persisted model could not be loaded.
    #[error("model load error: {0}")]
    ModelLoad(String),

    /// An evaluation precondition was not met.
    #[error("evaluation error: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
