use std::path::PathBuf;

use thiserror::Error;

use crate::topology::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid topology: {}", join_violations(.0))]
    Topology(Vec<Violation>),

    /// A run or experiment was configured in a way that cannot complete.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Malformed input to an analytics or statistics routine.
    #[error("input error: {0}")]
    Input(String),

    /// A config document failed to parse or resolve.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    /// The simulation state broke one of its accounting identities.
    #[error("invariant violation at t={time}: {detail}")]
    Invariant { time: f64, detail: String },

    /// A replication aborted; carries the seed needed to reproduce it.
    #[error("replication failed (instance {instance}, policy {policy}, rep {rep}, seed {seed}): {source}")]
    Replication {
        instance: String,
        policy: String,
        rep: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that indicate a broken simulation rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        match self {
            Error::Invariant { .. } => true,
            Error::Replication { source, .. } => source.is_invariant_violation(),
            _ => false,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
