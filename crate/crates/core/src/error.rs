use std::path::PathBuf;

use crate::graph::{EpochId, VertexId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("information matrix is not symmetric positive-definite")]
    NotPositiveDefinite,
    #[error("edge {from} -> {to} is a self loop")]
    SelfLoop { from: VertexId, to: VertexId },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("vertex {vertex} has epoch {epoch} which is not part of the graph")]
    ForeignEpoch { vertex: VertexId, epoch: EpochId },
    #[error("graph is not connected")]
    Disconnected,
    #[error("no fixed vertex given; the problem has a free gauge")]
    NoFixedVertex,
    #[error("linear solve failed: {0}")]
    Solver(String),
    #[error("no inactive graph at index {0}")]
    NoSuchInactive(usize),
    #[error("merge needs at least one loop edge")]
    NoLoopEdges,
    #[error("loop edge {from} -> {to} must join the active graph and inactive graph {inactive}")]
    LoopEdgeEndpoints {
        from: VertexId,
        to: VertexId,
        inactive: usize,
    },
    #[error("active graph holds a single epoch; nothing to unmerge")]
    NothingToUnmerge,
    #[error("missing backup for epochs {0:?}")]
    MissingBackup(Vec<EpochId>),
    #[error("grid geometry mismatch")]
    GridMismatch,
    #[error("histogram geometry mismatch")]
    HistogramMismatch,
    #[error("reference histogram is empty")]
    EmptyHistogram,
    #[error("map has no points")]
    EmptyMap,
    #[error("every point was skipped (too few neighbors or degenerate covariance)")]
    AllPointsSkipped,
    #[error("snapshot holds a single epoch; detectors need a merged graph")]
    NotMerged,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sequence has no forced merge")]
    NoMerge,
    #[error("ROC needs both correct and invalid sequences for detector {0}")]
    SingleClass(String),
    #[error("unknown detector '{0}'")]
    UnknownDetector(String),
    #[error("invalid configuration: {0}")]
    Config(String),
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
}
