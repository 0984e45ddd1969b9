//! Free-space violation analysis between current-epoch scans and merged-in scans.
//!
//! Each point of a target scan is projected into a source scan's polar frame
//! and compared against the source returns within a small bearing window:
//! a point well in front of everything the source saw is a *change* (it sits in
//! space the source observed as free), a point inside a tight band of source
//! ranges *agrees*, and everything else carries no information. Labels are
//! fused per point over all pairings, and the share of *change* among the
//! informative labels is the invalidity ratio.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{require_merged, Detector, DetectorKind};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::pose::{angular_distance, Pose2};
use crate::raster::walk_segment;
use crate::scan::Scan;
use crate::store::{Snapshot, VertexView};

/// Per-point classification. The derived order is the fusion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    NoInfo,
    Change,
    Agree,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::NoInfo => "no_info",
            ClassLabel::Change => "change",
            ClassLabel::Agree => "agree",
        }
    }
}

/// Agree wins over change, change wins over no information.
pub fn fuse(old: ClassLabel, new: ClassLabel) -> ClassLabel {
    old.max(new)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChangeDetectorConfig {
    /// Range tolerance in meters.
    pub t_r: f64,
    /// Bearing window half-width in radians.
    pub t_alpha: f64,
    pub n_recent: usize,
    /// Minimum shared visibility area for a scan pair, in m².
    pub tau_overlap: f64,
    pub t_unmerge: f64,
    pub cache_invalidate_trans: f64,
    pub cache_invalidate_rot: f64,
    /// Visibility grid cell size in meters.
    pub visibility_cell: f64,
}

impl Default for ChangeDetectorConfig {
    fn default() -> Self {
        Self {
            t_r: 0.1,
            t_alpha: 3f64.to_radians(),
            n_recent: 10,
            tau_overlap: 1.0,
            t_unmerge: 0.5,
            cache_invalidate_trans: 0.02,
            cache_invalidate_rot: 0.5f64.to_radians(),
            visibility_cell: 0.2,
        }
    }
}

impl ChangeDetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.t_r,
            self.t_alpha,
            self.tau_overlap,
            self.cache_invalidate_trans,
            self.cache_invalidate_rot,
            self.visibility_cell,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.n_recent == 0 {
            return Err(Error::Config("change detector thresholds must be positive".into()));
        }
        if !(self.t_unmerge > 0.0 && self.t_unmerge < 1.0) {
            return Err(Error::Config("change.t_unmerge must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// A source scan prepared for repeated bearing-window lookups.
pub struct SourceView<'a> {
    scan: &'a Scan,
    bearings: Vec<f64>,
    first: f64,
    span: f64,
}

impl<'a> SourceView<'a> {
    pub fn new(scan: &'a Scan) -> Self {
        let bearings: Vec<f64> = scan.points().iter().map(|p| p.bearing).collect();
        let first = bearings.first().copied().unwrap_or(0.0);
        let span = bearings.last().map_or(0.0, |l| l - first);
        Self {
            scan,
            bearings,
            first,
            span,
        }
    }

    /// Min and max range over source returns within `t_alpha` of `bearing`.
    fn range_band(&self, bearing: f64, t_alpha: f64) -> Option<(f64, f64)> {
        const SLACK: f64 = 1e-9;
        let last = self.first + self.span;
        let k_lo = ((self.first - bearing - t_alpha) / TAU).floor() as i64 - 1;
        let k_hi = ((last - bearing + t_alpha) / TAU).ceil() as i64 + 1;
        let mut band: Option<(f64, f64)> = None;
        for k in k_lo..=k_hi {
            let center = bearing + k as f64 * TAU;
            let lo = self.bearings.partition_point(|b| *b < center - t_alpha - SLACK);
            let hi = self.bearings.partition_point(|b| *b <= center + t_alpha + SLACK);
            for idx in lo..hi {
                if angular_distance(self.bearings[idx], bearing) <= t_alpha {
                    let r = self.scan.points()[idx].range;
                    band = Some(match band {
                        Some((mn, mx)) => (mn.min(r), mx.max(r)),
                        None => (r, r),
                    });
                }
            }
        }
        band
    }
}

/// The range test for one projected target point.
pub fn classify_range(r_t: f64, r_min: f64, r_max: f64, cfg: &ChangeDetectorConfig) -> ClassLabel {
    if r_t < r_min - cfg.t_r {
        ClassLabel::Change
    } else if r_t > r_max + cfg.t_r {
        ClassLabel::NoInfo
    } else if r_max - r_min <= 2.0 * cfg.t_r {
        ClassLabel::Agree
    } else {
        ClassLabel::NoInfo
    }
}

/// Classifies every point of `target` against the free space observed by `source`.
pub fn classify_scan_pair(target: &Scan, source: &Scan, cfg: &ChangeDetectorConfig) -> Vec<ClassLabel> {
    classify_against(target, &SourceView::new(source), cfg)
}

pub fn classify_against(target: &Scan, source: &SourceView<'_>, cfg: &ChangeDetectorConfig) -> Vec<ClassLabel> {
    let src_pose = source.scan.pose;
    target
        .global_endpoints()
        .into_iter()
        .map(|g| {
            let l = src_pose.inverse_transform_point(g);
            let bearing = l[1].atan2(l[0]);
            let r_t = l[0].hypot(l[1]);
            if r_t > source.scan.range_max() {
                return ClassLabel::NoInfo;
            }
            match source.range_band(bearing, cfg.t_alpha) {
                Some((mn, mx)) => classify_range(r_t, mn, mx, cfg),
                None => ClassLabel::NoInfo,
            }
        })
        .collect()
}

/// Cells observed by a scan: every cell a ray crosses, endpoint cells included.
pub fn observed_cells(scan: &Scan, cell_size: f64) -> Vec<(i64, i64)> {
    let mut cells = HashSet::new();
    let origin = [scan.pose.x, scan.pose.y];
    for e in scan.global_endpoints() {
        walk_segment([0.0, 0.0], cell_size, origin, e, |i, j| {
            cells.insert((i, j));
        });
    }
    let mut v: Vec<_> = cells.into_iter().collect();
    v.sort_unstable();
    v
}

/// For every cell, the other-epoch vertices that observed it.
#[derive(Debug, Clone, Default)]
pub struct VisibilityGrid {
    cell_size: f64,
    cells: HashMap<(i64, i64), Vec<VertexId>>,
    poses: BTreeMap<VertexId, Pose2>,
}

impl VisibilityGrid {
    pub fn build<'a>(vertices: impl IntoIterator<Item = &'a VertexView>, cell_size: f64) -> Self {
        let mut g = VisibilityGrid {
            cell_size,
            ..Default::default()
        };
        for v in vertices {
            g.poses.insert(v.id, v.pose());
            for c in observed_cells(&v.scan, cell_size) {
                g.cells.entry(c).or_default().push(v.id);
            }
        }
        g
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn ids_at(&self, cell: (i64, i64)) -> &[VertexId] {
        self.cells.get(&cell).map_or(&[], Vec::as_slice)
    }

    pub fn contains_vertex(&self, id: VertexId) -> bool {
        self.poses.contains_key(&id)
    }

    /// Shared observed area (m²) between `cells` and each indexed vertex.
    pub fn overlaps(&self, cells: &[(i64, i64)]) -> BTreeMap<VertexId, f64> {
        let mut counts: BTreeMap<VertexId, usize> = BTreeMap::new();
        for c in cells {
            for id in self.ids_at(*c) {
                *counts.entry(*id).or_default() += 1;
            }
        }
        let area = self.cell_size * self.cell_size;
        counts.into_iter().map(|(id, n)| (id, n as f64 * area)).collect()
    }

    #[cfg(test)]
    pub(crate) fn insert(&mut self, cell: (i64, i64), id: VertexId) {
        self.cells.entry(cell).or_default().push(id);
    }

    /// Whether the indexed vertex set or any indexed pose no longer matches `others`.
    fn is_stale<'a>(&self, others: impl Iterator<Item = &'a VertexView>, cfg: &ChangeDetectorConfig) -> bool {
        let mut n = 0;
        for v in others {
            n += 1;
            match self.poses.get(&v.id) {
                Some(p) if !moved(p, &v.pose(), cfg) => {}
                _ => return true,
            }
        }
        n != self.poses.len()
    }
}

fn moved(a: &Pose2, b: &Pose2, cfg: &ChangeDetectorConfig) -> bool {
    a.translation_distance(b) > cfg.cache_invalidate_trans
        || angular_distance(a.theta, b.theta) > cfg.cache_invalidate_rot
}

/// Pairs each of the `n_recent` newest current-epoch vertices with every
/// indexed vertex sharing at least `tau_overlap` of observed area.
pub fn select_pairs(snapshot: &Snapshot, grid: &VisibilityGrid, cfg: &ChangeDetectorConfig) -> Vec<(VertexId, VertexId)> {
    let mut pairs = Vec::new();
    for v in snapshot.recent_current(cfg.n_recent) {
        let cells = observed_cells(&v.scan, grid.cell_size);
        for (other, area) in grid.overlaps(&cells) {
            if area >= cfg.tau_overlap {
                pairs.push((v.id, other));
            }
        }
    }
    pairs
}

#[derive(Debug, Clone)]
struct FusedState {
    target_pose: Pose2,
    labels: Vec<ClassLabel>,
    sources: BTreeMap<VertexId, Pose2>,
}

/// Label counts behind one invalidity ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelCounts {
    pub change: usize,
    pub agree: usize,
    pub no_info: usize,
}

impl LabelCounts {
    /// `change / (agree + change)`, or 0 without informative labels.
    pub fn invalidity(&self) -> f64 {
        invalidity_ratio(self.change, self.agree)
    }
}

pub fn invalidity_ratio(change: usize, agree: usize) -> f64 {
    if change + agree == 0 {
        0.0
    } else {
        change as f64 / (change + agree) as f64
    }
}

/// Stateful change detector; fused labels persist across updates.
pub struct ChangeDetector {
    cfg: ChangeDetectorConfig,
    grid: Option<VisibilityGrid>,
    states: HashMap<VertexId, FusedState>,
    grid_builds: usize,
    classifications: usize,
    last_counts: LabelCounts,
}

impl ChangeDetector {
    pub fn new(cfg: ChangeDetectorConfig) -> Self {
        Self {
            cfg,
            grid: None,
            states: HashMap::new(),
            grid_builds: 0,
            classifications: 0,
            last_counts: LabelCounts::default(),
        }
    }

    pub fn config(&self) -> &ChangeDetectorConfig {
        &self.cfg
    }

    /// Number of visibility-grid rebuilds so far.
    pub fn grid_builds(&self) -> usize {
        self.grid_builds
    }

    /// Number of scan-pair classifications performed so far.
    pub fn classifications(&self) -> usize {
        self.classifications
    }

    pub fn last_counts(&self) -> LabelCounts {
        self.last_counts
    }

    pub fn fused_labels(&self, vertex: VertexId) -> Option<&[ClassLabel]> {
        self.states.get(&vertex).map(|s| s.labels.as_slice())
    }

    /// Drops fused states whose target or any contributing source has moved
    /// beyond the cache thresholds, or no longer exists. Returns how many were dropped.
    pub fn invalidate_cache(&mut self, snapshot: &Snapshot) -> usize {
        let cfg = &self.cfg;
        let still_valid = |id: &VertexId, pose: &Pose2| snapshot.get(*id).is_some_and(|v| !moved(pose, &v.pose(), cfg));
        let before = self.states.len();
        self.states
            .retain(|id, s| still_valid(id, &s.target_pose) && s.sources.iter().all(|(sid, p)| still_valid(sid, p)));
        before - self.states.len()
    }

    fn classify_into(&mut self, target: &VertexView, source: &VertexView) {
        let state = self.states.entry(target.id).or_insert_with(|| FusedState {
            target_pose: target.pose(),
            labels: vec![ClassLabel::NoInfo; target.scan.len()],
            sources: BTreeMap::new(),
        });
        if state.sources.contains_key(&source.id) {
            return;
        }
        let labels = classify_scan_pair(&target.scan, &source.scan, &self.cfg);
        for (fused, new) in state.labels.iter_mut().zip(labels) {
            *fused = fuse(*fused, new);
        }
        state.sources.insert(source.id, source.pose());
        self.classifications += 1;
    }

    /// Writes `vertex,point,label` rows for every fused state.
    pub fn write_label_dump(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "vertex,point,label")?;
        let ids: BTreeSet<&VertexId> = self.states.keys().collect();
        for id in ids {
            for (i, l) in self.states[id].labels.iter().enumerate() {
                writeln!(out, "{},{},{}", id, i, l.as_str())?;
            }
        }
        Ok(())
    }
}

impl Detector for ChangeDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Change
    }

    fn threshold(&self) -> f64 {
        self.cfg.t_unmerge
    }

    fn reset(&mut self) {
        self.grid = None;
        self.states.clear();
        self.last_counts = LabelCounts::default();
    }

    fn score(&mut self, snapshot: &Snapshot, _new_vertex: VertexId) -> Result<f64> {
        require_merged(snapshot)?;
        self.invalidate_cache(snapshot);

        let stale = match &self.grid {
            Some(g) => g.is_stale(snapshot.others(), &self.cfg),
            None => true,
        };
        if stale {
            self.grid = Some(VisibilityGrid::build(snapshot.others(), self.cfg.visibility_cell));
            self.grid_builds += 1;
        }
        let grid = self.grid.as_ref().expect("grid built above");
        let pairs = select_pairs(snapshot, grid, &self.cfg);

        for (cur, other) in &pairs {
            let (Some(c), Some(o)) = (snapshot.get(*cur), snapshot.get(*other)) else {
                continue;
            };
            self.classify_into(c, o);
            self.classify_into(o, c);
        }

        let mut considered: BTreeSet<VertexId> =
            snapshot.recent_current(self.cfg.n_recent).iter().map(|v| v.id).collect();
        considered.extend(pairs.iter().map(|p| p.1));
        let mut counts = LabelCounts::default();
        for id in &considered {
            if let Some(s) = self.states.get(id) {
                for l in &s.labels {
                    match l {
                        ClassLabel::Change => counts.change += 1,
                        ClassLabel::Agree => counts.agree += 1,
                        ClassLabel::NoInfo => counts.no_info += 1,
                    }
                }
            }
        }
        self.last_counts = counts;
        Ok(counts.invalidity())
    }
}
