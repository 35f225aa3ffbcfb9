//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough context
//! (paths, line numbers, offending ids) that the CLI can print the message
//! as-is and exit; [`Error::exit_code`] maps usage and missing-input problems
//! to exit code 2 and everything else to 1.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("input file not found: {path}")]
    MissingInput { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate document id {id:?}")]
    DuplicateDocId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("empty n-gram query")]
    EmptyQuery,

    #[error("n-gram query spans {len} tokens but the index supports at most {max}")]
    QueryTooLong { len: usize, max: usize },

    #[error("unknown culture {culture:?}")]
    UnknownCulture { culture: String },

    #[error("generations reference cultures missing from the lexicon: {cultures}")]
    UnknownCultures { cultures: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("correlation input: {0}")]
    Stats(String),

    #[error("overshadowing ratio requires at least one memorized symbol")]
    NoMemorizedSymbols,

    #[error("no association label for culture {culture:?}, topic {topic}, symbol {symbol:?}")]
    UnlabeledPair {
        culture: String,
        topic: String,
        symbol: String,
    },

    #[error("topic model vocabulary is empty after stopword removal")]
    EmptyVocabulary,

    #[error("output {path} already exists; pass --force to overwrite")]
    WouldOverwrite { path: PathBuf },

    #[error("missing {what} at {path}; run `attrscan {stage}` first")]
    MissingStage {
        what: String,
        stage: String,
        path: PathBuf,
    },

    #[error("index file {path}: {message}")]
    IndexFormat { path: PathBuf, message: String },

    #[error("keyword interpreter hook: {0}")]
    Hook(String),

    #[error("writing {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl Error {
    /// Exit code for the CLI: 2 for missing inputs and bad configuration
    /// (caller mistakes), 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingInput { .. } | Error::Config(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput { path }
        } else {
            Error::Io { path, source }
        }
    }
}
