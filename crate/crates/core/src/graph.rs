//! Pose-graph data model: vertices carrying scans, typed edges and epoch sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::Pose2;
use crate::scan::Scan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of one span of uninterrupted localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpochId(pub u32);

impl fmt::Display for EpochId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Symmetric positive-definite 3×3 weight on an `(x, y, θ)` residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Information(Matrix3<f64>);

impl Information {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let scale = m.amax().max(f64::MIN_POSITIVE);
        if (m - m.transpose()).amax() > 1e-12 * scale || m.cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self(m))
    }

    pub fn diagonal(xx: f64, yy: f64, tt: f64) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&nalgebra::Vector3::new(xx, yy, tt)))
    }

    /// Row-major entries.
    pub fn from_row_slice(v: &[f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(v))
    }

    pub fn to_row_array(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)], m[(0, 1)], m[(0, 2)],
            m[(1, 0)], m[(1, 1)], m[(1, 2)],
            m[(2, 0)], m[(2, 1)], m[(2, 2)],
        ]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Odometry,
    LoopClosure,
    MergeLoopClosure,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Odometry => "odometry",
            EdgeKind::LoopClosure => "loop_closure",
            EdgeKind::MergeLoopClosure => "merge_loop_closure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "odometry" => Some(EdgeKind::Odometry),
            "loop_closure" => Some(EdgeKind::LoopClosure),
            "merge_loop_closure" => Some(EdgeKind::MergeLoopClosure),
            _ => None,
        }
    }
}

/// A relative-pose constraint: `to` observed from `from` at `relative_pose`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub kind: EdgeKind,
    pub relative_pose: Pose2,
    pub information: Information,
}

impl Edge {
    pub fn new(
        from: VertexId,
        to: VertexId,
        kind: EdgeKind,
        relative_pose: Pose2,
        information: Information,
    ) -> Result<Self> {
        if from == to {
            return Err(Error::SelfLoop { from, to });
        }
        Ok(Self {
            from,
            to,
            kind,
            relative_pose,
            information,
        })
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.from == v || self.to == v
    }
}

/// A keyframe. The pose estimate lives in the scan so the two never disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    id: VertexId,
    epoch: EpochId,
    scan: Scan,
}

impl Vertex {
    pub fn new(id: VertexId, epoch: EpochId, scan: Scan) -> Self {
        Self { id, epoch, scan }
    }

    pub fn id(&self) -> VertexId {
        self.id
    }

    pub fn epoch(&self) -> EpochId {
        self.epoch
    }

    pub fn pose(&self) -> Pose2 {
        self.scan.pose
    }

    pub fn scan(&self) -> &Scan {
        &self.scan
    }

    pub(crate) fn set_pose(&mut self, pose: Pose2) {
        self.scan.pose = pose;
    }
}

/// A pose graph holding data from one or more epochs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlamGraph {
    epochs: BTreeSet<EpochId>,
    vertices: BTreeMap<VertexId, Vertex>,
    edges: Vec<Edge>,
}

impl SlamGraph {
    pub fn new(epoch: EpochId) -> Self {
        Self {
            epochs: BTreeSet::from([epoch]),
            ..Default::default()
        }
    }

    /// Reassembles a graph from parts, checking every structural invariant
    /// except connectivity.
    pub fn from_parts(
        epochs: BTreeSet<EpochId>,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let mut g = SlamGraph {
            epochs,
            ..Default::default()
        };
        for v in vertices {
            g.insert_vertex(v)?;
        }
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    pub fn epochs(&self) -> &BTreeSet<EpochId> {
        &self.epochs
    }

    pub fn epoch_key(&self) -> Vec<EpochId> {
        self.epochs.iter().copied().collect()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = &Vertex> + '_ {
        self.vertices.values()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.vertices.contains_key(&id)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices_in_epoch(&self, epoch: EpochId) -> impl Iterator<Item = &Vertex> + '_ {
        self.vertices.values().filter(move |v| v.epoch == epoch)
    }

    pub fn insert_vertex(&mut self, v: Vertex) -> Result<()> {
        if !self.epochs.contains(&v.epoch) {
            return Err(Error::ForeignEpoch {
                vertex: v.id,
                epoch: v.epoch,
            });
        }
        if self.vertices.contains_key(&v.id) {
            return Err(Error::DuplicateVertex(v.id));
        }
        self.vertices.insert(v.id, v);
        Ok(())
    }

    pub fn add_edge(&mut self, e: Edge) -> Result<()> {
        for id in [e.from, e.to] {
            if !self.vertices.contains_key(&id) {
                return Err(Error::UnknownVertex(id));
            }
        }
        self.edges.push(e);
        Ok(())
    }

    pub fn set_pose(&mut self, id: VertexId, pose: Pose2) -> Result<()> {
        self.vertices
            .get_mut(&id)
            .ok_or(Error::UnknownVertex(id))?
            .set_pose(pose);
        Ok(())
    }

    /// Left-multiplies every vertex pose by `t`.
    pub fn transform(&mut self, t: &Pose2) {
        for v in self.vertices.values_mut() {
            let p = t.compose(&v.pose());
            v.set_pose(p);
        }
    }

    /// Moves all vertices, edges and epochs of `other` into `self`.
    pub(crate) fn absorb(&mut self, other: SlamGraph) -> Result<()> {
        self.epochs.extend(other.epochs);
        for v in other.vertices.into_values() {
            self.insert_vertex(v)?;
        }
        self.edges.extend(other.edges);
        Ok(())
    }

    /// Drops every vertex whose epoch is not `keep`, with all incident edges,
    /// and shrinks the epoch set to `{keep}`. Returns the number of removed vertices.
    pub(crate) fn retain_epoch(&mut self, keep: EpochId) -> usize {
        let before = self.vertices.len();
        self.vertices.retain(|_, v| v.epoch == keep);
        let vertices = &self.vertices;
        self.edges
            .retain(|e| vertices.contains_key(&e.from) && vertices.contains_key(&e.to));
        self.epochs = BTreeSet::from([keep]);
        before - self.vertices.len()
    }

    /// Breadth-first connectivity over undirected edges. The empty graph is connected.
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.keys().next() else {
            return true;
        };
        let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.from).or_default().push(e.to);
            adj.entry(e.to).or_default().push(e.from);
        }
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for n in adj.get(&v).into_iter().flatten() {
                if seen.insert(*n) {
                    queue.push_back(*n);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Σ rᵀ Ω r over all edges at the current estimate.
    pub fn chi2(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let (a, b) = (self.vertices[&e.from].pose(), self.vertices[&e.to].pose());
                let r = edge_residual(&a, &b, &e.relative_pose);
                let r = nalgebra::Vector3::from(r);
                (r.transpose() * e.information.matrix() * r)[(0, 0)]
            })
            .sum()
    }
}

/// Residual `z⁻¹ ∘ (a⁻¹ ∘ b)` with the angle wrapped into `(-π, π]`.
pub fn edge_residual(a: &Pose2, b: &Pose2, z: &Pose2) -> [f64; 3] {
    let e = z.between(&a.between(b));
    [e.x, e.y, e.theta]
}
