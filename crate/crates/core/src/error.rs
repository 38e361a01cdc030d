use thiserror::Error;

use crate::families::UsageVector;

/// Errors raised by mesh construction, family oracles and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("retained cell set is empty")]
    EmptyDomain,

    #[error("domain is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid face set: {0}")]
    InvalidFaces(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("trial density {index} is not admissible (min usage {min_usage:.3e})")]
    Inadmissible {
        index: usize,
        min_usage: f64,
        object: UsageVector,
    },

    #[error("capacity problem: {0}")]
    Capacity(String),

    #[error("mesh has {cells} cells, limit is {limit}")]
    TooLarge { cells: usize, limit: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
