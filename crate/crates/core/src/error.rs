use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension argument was zero or inconsistent with its peers.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An index (subchannel, bit position, codeword position) was out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A matrix failed a structural requirement (rank, unitarity, ...).
    #[error("degenerate matrix: {0}")]
    Degenerate(String),

    /// A configuration field failed validation. Carries the field name so the
    /// CLI can point at the offending line.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// File I/O while loading precoder matrices or writing outputs.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A text file (precoder matrix, config, CSV) could not be parsed.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
