//! Merging inactive graphs into the active graph and undoing those merges.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeKind, EpochId, Information, VertexId};
use crate::optimize::{optimize, OptimizationResult};
use crate::pose::Pose2;
use crate::store::GraphStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeLabel {
    Correct,
    Invalid,
}

impl MergeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            MergeLabel::Correct => "correct",
            MergeLabel::Invalid => "invalid",
        }
    }
}

/// One forced merge from a merge-spec file.
///
/// Vertex and epoch references are ordinals within the scan log: the n-th
/// scan record and the n-th epoch (the log starts in epoch ordinal 0 and
/// every `epoch_break` opens the next one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    /// Scan ordinal after whose insertion the merge is applied; it is also the
    /// active-side endpoint of the loop edge.
    pub trigger_vertex: usize,
    /// Epoch ordinal of the inactive graph to merge.
    pub target_epoch: usize,
    /// Scan ordinal of the inactive-side endpoint; defaults to the first scan of `target_epoch`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_vertex: Option<usize>,
    /// Pose of the target vertex in the trigger vertex frame: `[x, y, theta]`.
    pub relative_pose: [f64; 3],
    /// Row-major information matrix.
    pub information: [f64; 9],
    pub label: MergeLabel,
}

pub fn read_merge_spec(path: &Path) -> Result<Vec<MergeRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_merge_spec(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        e => e,
    })
}

pub fn parse_merge_spec(reader: impl BufRead) -> Result<Vec<MergeRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<merge spec>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MergeRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_merge_spec(records: &[MergeRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("merge records serialize"));
        s.push('\n');
    }
    s
}

/// Maps log ordinals to store identifiers as the log is replayed.
#[derive(Debug, Clone, Default)]
pub struct OrdinalMap {
    pub vertices: Vec<VertexId>,
    pub epochs: Vec<EpochId>,
    /// First scan ordinal of each epoch ordinal, when the epoch has scans.
    pub first_scan: Vec<Option<usize>>,
}

impl OrdinalMap {
    pub fn push_epoch(&mut self, epoch: EpochId) {
        self.epochs.push(epoch);
        self.first_scan.push(None);
    }

    pub fn push_vertex(&mut self, id: VertexId) {
        let ordinal = self.vertices.len();
        self.vertices.push(id);
        if let Some(slot) = self.first_scan.last_mut() {
            slot.get_or_insert(ordinal);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeCandidate {
    pub inactive_index: usize,
    pub target_epoch: EpochId,
    pub loop_edges: Vec<Edge>,
    pub label: MergeLabel,
}

/// Forced merges keyed by trigger ordinal. Stands in for place recognition.
#[derive(Debug, Clone, Default)]
pub struct MergeSchedule {
    records: Vec<MergeRecord>,
}

impl MergeSchedule {
    pub fn new(records: Vec<MergeRecord>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[MergeRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Merges scheduled for the scan with ordinal `trigger`, resolved against the
    /// store. Only active ↔ inactive merges are ever proposed; records whose
    /// target is not (or no longer) an inactive graph are skipped.
    pub fn find_merge_candidates(
        &self,
        store: &GraphStore,
        trigger: usize,
        ordinals: &OrdinalMap,
    ) -> Result<Vec<MergeCandidate>> {
        let mut out = Vec::new();
        for r in self.records.iter().filter(|r| r.trigger_vertex == trigger) {
            let Some(&from) = ordinals.vertices.get(r.trigger_vertex) else {
                continue;
            };
            let Some(&target_epoch) = ordinals.epochs.get(r.target_epoch) else {
                continue;
            };
            let Some(inactive_index) = store.inactive_index_of(target_epoch) else {
                continue;
            };
            let to_ordinal = r
                .target_vertex
                .or_else(|| ordinals.first_scan.get(r.target_epoch).copied().flatten());
            let Some(&to) = to_ordinal.and_then(|o| ordinals.vertices.get(o)) else {
                continue;
            };
            let edge = Edge::new(
                from,
                to,
                EdgeKind::MergeLoopClosure,
                Pose2::from_array(r.relative_pose),
                Information::from_row_slice(&r.information)?,
            )?;
            out.push(MergeCandidate {
                inactive_index,
                target_epoch,
                loop_edges: vec![edge],
                label: r.label,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnmergeOutcome {
    pub removed_vertices: usize,
    pub restored_graphs: usize,
    pub optimization: OptimizationResult,
}

impl GraphStore {
    /// Merges inactive graph `inactive_index` into the active graph.
    ///
    /// The inactive graph is backed up verbatim, rigidly moved so the first loop
    /// edge holds exactly, joined with all loop edges, and the union is optimized
    /// with the current epoch's first vertex fixed.
    pub fn merge(&mut self, inactive_index: usize, loop_edges: Vec<Edge>) -> Result<OptimizationResult> {
        let other = self
            .inactive
            .get(inactive_index)
            .ok_or(Error::NoSuchInactive(inactive_index))?;
        let first = loop_edges.first().ok_or(Error::NoLoopEdges)?;
        for e in &loop_edges {
            for v in [e.from, e.to] {
                if !self.active.contains(v) && !other.contains(v) {
                    return Err(Error::UnknownVertex(v));
                }
            }
            let crosses = (self.active.contains(e.from) && other.contains(e.to))
                || (other.contains(e.from) && self.active.contains(e.to));
            if !crosses {
                return Err(Error::LoopEdgeEndpoints {
                    from: e.from,
                    to: e.to,
                    inactive: inactive_index,
                });
            }
        }
        let anchor = self.anchor_vertex().ok_or(Error::UnknownVertex(first.from))?;

        // Rigid pre-alignment from the first loop edge.
        let z = first.relative_pose;
        let align = if self.active.contains(first.from) {
            let target = self.active.vertex(first.from).unwrap().pose().compose(&z);
            target.compose(&other.vertex(first.to).unwrap().pose().inverse())
        } else {
            let target = self.active.vertex(first.to).unwrap().pose().compose(&z.inverse());
            target.compose(&other.vertex(first.from).unwrap().pose().inverse())
        };

        let snapshot = other.clone();
        self.store_backup(&snapshot)?;
        let mut other = self.inactive.remove(inactive_index);
        other.transform(&align);
        self.active.absorb(other)?;
        for mut e in loop_edges {
            e.kind = EdgeKind::MergeLoopClosure;
            self.active.add_edge(e)?;
        }
        let result = optimize(&mut self.active, &BTreeSet::from([anchor]), &self.optimizer)?;
        self.bump();
        Ok(result)
    }

    /// Applies candidates in order, re-resolving each target graph's index.
    pub fn apply_candidates(&mut self, candidates: Vec<MergeCandidate>) -> Result<Vec<OptimizationResult>> {
        let mut out = Vec::new();
        for c in candidates {
            if let Some(i) = self.inactive_index_of(c.target_epoch) {
                out.push(self.merge(i, c.loop_edges)?);
            }
        }
        Ok(out)
    }

    /// Undoes every merge into the active graph.
    ///
    /// Vertices from other epochs and their edges are dropped, the remainder is
    /// re-optimized, and every backed-up inactive graph is restored as it was.
    pub fn unmerge(&mut self) -> Result<UnmergeOutcome> {
        if self.active.epochs().len() <= 1 {
            return Err(Error::NothingToUnmerge);
        }
        let merged: BTreeSet<EpochId> = self
            .active
            .epochs()
            .iter()
            .copied()
            .filter(|e| *e != self.current_epoch)
            .collect();
        let covered: BTreeSet<EpochId> = self.backups.keys().flatten().copied().collect();
        if !merged.is_subset(&covered) {
            return Err(Error::MissingBackup(merged.difference(&covered).copied().collect()));
        }
        let restored = self
            .backups
            .values()
            .map(|b| b.load())
            .collect::<Result<Vec<_>>>()?;

        let removed_vertices = self.active.retain_epoch(self.current_epoch);
        let optimization = match self.anchor_vertex() {
            Some(anchor) => optimize(&mut self.active, &BTreeSet::from([anchor]), &self.optimizer)?,
            None => OptimizationResult {
                iterations: 0,
                initial_chi2: 0.0,
                final_chi2: 0.0,
                converged: true,
            },
        };
        let restored_graphs = restored.len();
        self.inactive.extend(restored);
        self.backups.clear();
        self.bump();
        Ok(UnmergeOutcome {
            removed_vertices,
            restored_graphs,
            optimization,
        })
    }
}
