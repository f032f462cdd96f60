use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Every offending key, reported together.
    #[error("configuration has {} problem(s):\n  {}", .0.len(), .0.join("\n  "))]
    ConfigIssues(Vec<String>),

    #[error("range singularity: target is collocated with a node")]
    RangeSingularity,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matching is not injective: channel {0} assigned twice")]
    NonInjective(usize),

    #[error("infeasible assignment: {nodes} nodes but only {channels} channels")]
    Infeasible { nodes: usize, channels: usize },

    #[error("enumeration of {0} matchings exceeds the guard")]
    EnumerationTooLarge(u128),

    #[error("negative regret {value} at position {index}")]
    NegativeRegret { index: usize, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: malformed record: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    /// True for errors caused by user configuration rather than the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::ConfigIssues(_))
    }
}
