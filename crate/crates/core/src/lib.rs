//! Multi-epoch pose-graph SLAM bookkeeping with online detection of invalid map merges.
//!
//! A [`GraphStore`] keeps one active graph that receives new keyframes and any
//! number of inactive graphs from earlier localization epochs. Inactive graphs
//! can be merged into the active one and every merge can be undone. After a
//! merge, the detectors in [`detect`] compare what the robot currently sees
//! against the merged-in map and raise an alarm when the two contradict.

pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod graph;
pub mod merge;
pub mod optimize;
pub mod pose;
pub mod raster;
pub mod scan;
pub mod serialize;
pub mod sim;
pub mod store;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeKind, EpochId, Information, SlamGraph, Vertex, VertexId};
pub use merge::{MergeLabel, MergeRecord, MergeSchedule};
pub use pose::Pose2;
pub use scan::{PolarPoint, Scan};
pub use store::{GraphStore, Snapshot};
