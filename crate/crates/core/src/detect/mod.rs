//! Invalid-merge detectors.
//!
//! Every detector looks at a [`Snapshot`] of a merged active graph after a new
//! vertex was added and produces an invalidity score. Scores above the
//! detector's threshold raise an alarm.

pub mod change;
pub mod entropy;
pub mod gridmap;
pub mod histogram;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::store::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Change,
    Gridmap,
    Entropy,
    Histogram,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [
        DetectorKind::Change,
        DetectorKind::Gridmap,
        DetectorKind::Entropy,
        DetectorKind::Histogram,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Change => "change",
            DetectorKind::Gridmap => "gridmap",
            DetectorKind::Entropy => "entropy",
            DetectorKind::Histogram => "histogram",
        }
    }

    pub fn build(self, cfg: &Config) -> Box<dyn Detector> {
        match self {
            DetectorKind::Change => Box::new(change::ChangeDetector::new(cfg.change.clone())),
            DetectorKind::Gridmap => Box::new(gridmap::GridmapDetector::new(cfg.gridmap.clone())),
            DetectorKind::Entropy => Box::new(entropy::EntropyDetector::new(cfg.entropy.clone())),
            DetectorKind::Histogram => Box::new(histogram::HistogramDetector::new(cfg.histogram.clone())),
        }
    }

    /// Parses a comma-separated list such as `change,gridmap`.
    pub fn parse_list(s: &str) -> Result<Vec<DetectorKind>> {
        let mut out: Vec<DetectorKind> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownDetector(s.to_string()))
    }
}

/// One detector evaluation after a new vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub detector: DetectorKind,
    pub vertex: VertexId,
    pub score: f64,
    pub alarm: bool,
    pub compute_ms: f64,
}

pub trait Detector: Send {
    fn kind(&self) -> DetectorKind;

    /// Alarm threshold: the detector alarms when `score > threshold`.
    fn threshold(&self) -> f64;

    /// Invalidity score for the merged snapshot after `new_vertex` was added.
    fn score(&mut self, snapshot: &Snapshot, new_vertex: VertexId) -> Result<f64>;

    /// Drops all cached state, e.g. after an unmerge.
    fn reset(&mut self) {}

    /// Runs [`Detector::score`] and wraps the result with timing and the alarm flag.
    fn update(&mut self, snapshot: &Snapshot, new_vertex: VertexId) -> Result<DetectorReport> {
        let start = Instant::now();
        let score = self.score(snapshot, new_vertex)?;
        let compute_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(DetectorReport {
            detector: self.kind(),
            vertex: new_vertex,
            score,
            alarm: score > self.threshold(),
            compute_ms,
        })
    }
}

pub(crate) fn require_merged(snapshot: &Snapshot) -> Result<()> {
    if snapshot.is_merged() {
        Ok(())
    } else {
        Err(Error::NotMerged)
    }
}
