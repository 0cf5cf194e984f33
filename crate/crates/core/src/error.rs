use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("node {node} out of range for a topology of {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("topology is disconnected")]
    Disconnected,

    #[error("no connected topology after {attempts} draws (n={n}, radius={radius})")]
    RejectionCapExceeded {
        n: usize,
        radius: f64,
        attempts: u32,
    },

    #[error("block {block} is not in the store ({len} blocks)")]
    UnknownBlock { block: usize, len: usize },

    #[error("payload length mismatch: expected {expected} bytes, got {actual}")]
    PayloadLength { expected: usize, actual: usize },

    #[error("packet is not decodable by this receiver: {0}")]
    NotDecodable(String),

    #[error("decoded payload of block {block} at node {node} differs from the original")]
    CorruptDecode { block: usize, node: usize },

    #[error("simulation contract violated: {0}")]
    Contract(String),

    #[error("empty sample list")]
    EmptySamples,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
