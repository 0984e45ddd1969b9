//! Loop-closure-verification baseline: coarse unnormalized point histograms
//! compared with the histogram intersection kernel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{require_merged, Detector, DetectorKind};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::store::Snapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct PointHistogram {
    origin: [f64; 2],
    cell_size: f64,
    counts: BTreeMap<(i64, i64), u64>,
}

impl PointHistogram {
    pub fn counts(&self) -> &BTreeMap<(i64, i64), u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, cell: (i64, i64)) -> u64 {
        self.counts.get(&cell).copied().unwrap_or(0)
    }
}

/// Bins points by `floor((p − origin) / cell_size)`; a point on a cell
/// boundary belongs to the higher-index cell.
pub fn build_histogram<'a>(
    points: impl IntoIterator<Item = &'a [f64; 2]>,
    cell_size: f64,
    origin: [f64; 2],
) -> PointHistogram {
    let mut counts = BTreeMap::new();
    for p in points {
        let key = (
            ((p[0] - origin[0]) / cell_size).floor() as i64,
            ((p[1] - origin[1]) / cell_size).floor() as i64,
        );
        *counts.entry(key).or_insert(0) += 1;
    }
    PointHistogram {
        origin,
        cell_size,
        counts,
    }
}

/// `Σ min(h1, h2) / Σ h1`, in `[0, 1]`.
pub fn intersection_score(h1: &PointHistogram, h2: &PointHistogram) -> Result<f64> {
    if h1.origin != h2.origin || h1.cell_size != h2.cell_size {
        return Err(Error::HistogramMismatch);
    }
    let total = h1.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let shared: u64 = h1.counts.iter().map(|(k, c)| (*c).min(h2.get(*k))).sum();
    Ok(shared as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    pub cell_size: f64,
    pub n_recent: usize,
    pub t_unmerge: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            cell_size: 0.5,
            n_recent: 10,
            t_unmerge: 0.5,
        }
    }
}

impl HistogramConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0) || self.n_recent == 0 {
            return Err(Error::Config("histogram.cell_size and n_recent must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.t_unmerge) {
            return Err(Error::Config("histogram.t_unmerge must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

pub struct HistogramDetector {
    cfg: HistogramConfig,
}

impl HistogramDetector {
    pub fn new(cfg: HistogramConfig) -> Self {
        Self { cfg }
    }
}

impl Detector for HistogramDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Histogram
    }

    fn threshold(&self) -> f64 {
        self.cfg.t_unmerge
    }

    fn score(&mut self, snapshot: &Snapshot, _new_vertex: VertexId) -> Result<f64> {
        require_merged(snapshot)?;
        let recent: Vec<[f64; 2]> = snapshot
            .recent_current(self.cfg.n_recent)
            .iter()
            .flat_map(|v| v.scan.global_endpoints())
            .collect();
        let other: Vec<[f64; 2]> = snapshot.others().flat_map(|v| v.scan.global_endpoints()).collect();
        let origin = [0.0, 0.0];
        let h1 = build_histogram(&recent, self.cfg.cell_size, origin);
        let h2 = build_histogram(&other, self.cfg.cell_size, origin);
        Ok(1.0 - intersection_score(&h1, &h2)?)
    }
}
