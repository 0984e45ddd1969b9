//! The single active graph plus archived inactive graphs and merge backups.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeKind, EpochId, Information, SlamGraph, Vertex, VertexId};
use crate::optimize::{optimize, OptimizationResult, OptimizerConfig};
use crate::pose::Pose2;
use crate::scan::Scan;
use crate::serialize;

/// Where a backed-up inactive graph lives until it is restored.
#[derive(Debug, Clone)]
pub enum Backup {
    Memory(SlamGraph),
    Disk(PathBuf),
}

impl Backup {
    pub fn load(&self) -> Result<SlamGraph> {
        match self {
            Backup::Memory(g) => Ok(g.clone()),
            Backup::Disk(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serialize::parse_graph(&text)
            }
        }
    }
}

/// Controls when backups are written to disk instead of being kept in memory.
#[derive(Debug, Clone, Default)]
pub struct BackupPolicy {
    /// Directory for spilled backups; `None` keeps everything in memory.
    pub spill_dir: Option<PathBuf>,
    /// Graphs with at least this many vertices are spilled.
    pub spill_min_vertices: usize,
}

#[derive(Debug, Clone)]
pub struct GraphStore {
    pub(crate) active: SlamGraph,
    pub(crate) inactive: Vec<SlamGraph>,
    pub(crate) backups: BTreeMap<Vec<EpochId>, Backup>,
    pub(crate) current_epoch: EpochId,
    pub(crate) last_vertex: Option<VertexId>,
    next_epoch: u32,
    next_vertex: u64,
    version: u64,
    pub optimizer: OptimizerConfig,
    pub backup_policy: BackupPolicy,
}

impl Default for GraphStore {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphStore {
    /// An empty store. The first `begin_epoch` yields epoch 1.
    pub fn new() -> Self {
        Self {
            active: SlamGraph::new(EpochId(0)),
            inactive: Vec::new(),
            backups: BTreeMap::new(),
            current_epoch: EpochId(0),
            last_vertex: None,
            next_epoch: 1,
            next_vertex: 1,
            version: 0,
            optimizer: OptimizerConfig::default(),
            backup_policy: BackupPolicy::default(),
        }
    }

    pub fn active(&self) -> &SlamGraph {
        &self.active
    }

    pub fn inactive(&self) -> &[SlamGraph] {
        &self.inactive
    }

    pub fn backups(&self) -> &BTreeMap<Vec<EpochId>, Backup> {
        &self.backups
    }

    pub fn current_epoch(&self) -> EpochId {
        self.current_epoch
    }

    /// Incremented on every mutation.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn bump(&mut self) {
        self.version += 1;
    }

    pub fn total_vertices(&self) -> usize {
        self.active.vertex_count() + self.inactive.iter().map(|g| g.vertex_count()).sum::<usize>()
    }

    /// Index of the inactive graph containing `epoch`.
    pub fn inactive_index_of(&self, epoch: EpochId) -> Option<usize> {
        self.inactive.iter().position(|g| g.epochs().contains(&epoch))
    }

    /// First vertex of the current epoch; anchors the active reference frame.
    pub fn anchor_vertex(&self) -> Option<VertexId> {
        self.active.vertices_in_epoch(self.current_epoch).map(|v| v.id()).next()
    }

    /// Ends the current epoch and opens a fresh, empty active graph.
    ///
    /// A non-empty active graph is archived as inactive; an empty one is dropped.
    pub fn begin_epoch(&mut self) -> EpochId {
        let epoch = EpochId(self.next_epoch);
        self.next_epoch += 1;
        let old = std::mem::replace(&mut self.active, SlamGraph::new(epoch));
        if !old.is_empty() {
            self.inactive.push(old);
        }
        // Backups refer to merges into the previous active graph, which has
        // now been archived as a whole.
        self.backups.clear();
        self.current_epoch = epoch;
        self.last_vertex = None;
        self.bump();
        epoch
    }

    /// Appends a keyframe to the current epoch.
    ///
    /// The pose is `previous ∘ odom`, or `identity ∘ odom` for the first vertex of
    /// the epoch, in which case no odometry edge is added.
    pub fn add_vertex(&mut self, scan: Scan, odom: Pose2, info: Information) -> Result<VertexId> {
        if self.current_epoch == EpochId(0) {
            self.begin_epoch();
        }
        let id = VertexId(self.next_vertex);
        let prev = self.last_vertex.and_then(|v| self.active.vertex(v)).map(|v| v.pose());
        let pose = prev.unwrap_or(Pose2::IDENTITY).compose(&odom);
        self.active
            .insert_vertex(Vertex::new(id, self.current_epoch, scan.with_pose(pose)))?;
        if let Some(p) = self.last_vertex.filter(|_| prev.is_some()) {
            self.active
                .add_edge(Edge::new(p, id, EdgeKind::Odometry, odom, info)?)?;
        }
        self.next_vertex += 1;
        self.last_vertex = Some(id);
        self.bump();
        Ok(id)
    }

    /// Re-optimizes the active graph with the anchor vertex fixed.
    pub fn optimize_active(&mut self) -> Result<OptimizationResult> {
        let anchor = self.anchor_vertex().ok_or(Error::NoFixedVertex)?;
        let result = optimize(&mut self.active, &BTreeSet::from([anchor]), &self.optimizer)?;
        self.bump();
        Ok(result)
    }

    /// Adds a loop closure between two vertices of the active graph.
    pub fn add_loop_closure(
        &mut self,
        from: VertexId,
        to: VertexId,
        relative_pose: Pose2,
        info: Information,
    ) -> Result<()> {
        self.active
            .add_edge(Edge::new(from, to, EdgeKind::LoopClosure, relative_pose, info)?)?;
        self.bump();
        Ok(())
    }

    pub(crate) fn store_backup(&mut self, graph: &SlamGraph) -> Result<()> {
        let key = graph.epoch_key();
        let backup = match &self.backup_policy.spill_dir {
            Some(dir) if graph.vertex_count() >= self.backup_policy.spill_min_vertices => {
                let name = key.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("_");
                let path = dir.join(format!("backup_{name}.graph"));
                std::fs::write(&path, serialize::write_graph(graph)).map_err(|e| Error::io(&path, e))?;
                Backup::Disk(path)
            }
            _ => Backup::Memory(graph.clone()),
        };
        self.backups.insert(key, backup);
        Ok(())
    }

    /// Read-only view for detectors.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            current_epoch: self.current_epoch,
            version: self.version,
            epoch_count: self.active.epochs().len(),
            vertices: self
                .active
                .vertices()
                .map(|v| VertexView {
                    id: v.id(),
                    epoch: v.epoch(),
                    scan: v.scan().clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VertexView {
    pub id: VertexId,
    pub epoch: EpochId,
    /// Carries the vertex pose at snapshot time.
    pub scan: Scan,
}

impl VertexView {
    pub fn pose(&self) -> Pose2 {
        self.scan.pose
    }
}

/// Immutable copy of the active graph's vertices, sorted by id.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub current_epoch: EpochId,
    pub version: u64,
    pub epoch_count: usize,
    pub vertices: Vec<VertexView>,
}

impl Snapshot {
    pub fn get(&self, id: VertexId) -> Option<&VertexView> {
        self.vertices
            .binary_search_by_key(&id, |v| v.id)
            .ok()
            .map(|i| &self.vertices[i])
    }

    pub fn is_merged(&self) -> bool {
        self.epoch_count > 1
    }

    pub fn current(&self) -> impl Iterator<Item = &VertexView> + '_ {
        self.vertices.iter().filter(move |v| v.epoch == self.current_epoch)
    }

    pub fn others(&self) -> impl Iterator<Item = &VertexView> + '_ {
        self.vertices.iter().filter(move |v| v.epoch != self.current_epoch)
    }

    /// The `n` newest current-epoch vertices, oldest first.
    pub fn recent_current(&self, n: usize) -> Vec<&VertexView> {
        let cur: Vec<&VertexView> = self.current().collect();
        cur[cur.len().saturating_sub(n)..].to_vec()
    }
}
