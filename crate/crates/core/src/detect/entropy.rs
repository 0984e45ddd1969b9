//! Map-quality baseline: mean differential entropy of local point neighborhoods.

use std::collections::HashMap;
use std::f64::consts::{E, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_merged, Detector, DetectorKind};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::store::{Snapshot, VertexView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaFormula {
    /// `H_all − ½ (H_cur + H_other)`
    MeanOfParts,
    /// `H_all − ½ (H_cur − H_other)`
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub radius: f64,
    pub min_neighbors: usize,
    pub delta_formula: DeltaFormula,
    pub t_unmerge: f64,
    /// Average over every `query_stride`-th point only; neighborhoods always
    /// use all points. 1 is exact.
    pub query_stride: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            radius: 0.3,
            min_neighbors: 5,
            delta_formula: DeltaFormula::MeanOfParts,
            t_unmerge: 0.1,
            query_stride: 1,
        }
    }
}

impl EntropyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || self.min_neighbors < 3 || self.query_stride == 0 {
            return Err(Error::Config(
                "entropy.radius must be > 0, min_neighbors >= 3 and query_stride >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform binning of 2D points for fixed-radius queries.
pub struct RadiusIndex<'a> {
    points: &'a [[f64; 2]],
    cell: f64,
    bins: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> RadiusIndex<'a> {
    pub fn new(points: &'a [[f64; 2]], radius: f64) -> Self {
        let mut bins: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            bins.entry(Self::key(p, radius)).or_default().push(i as u32);
        }
        Self {
            points,
            cell: radius,
            bins,
        }
    }

    fn key(p: &[f64; 2], cell: f64) -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    }

    /// Calls `f` with every point index within `radius` of `q` (inclusive).
    pub fn for_each_within(&self, q: [f64; 2], radius: f64, mut f: impl FnMut(usize)) {
        let r2 = radius * radius;
        let reach = (radius / self.cell).ceil() as i64;
        let (ci, cj) = Self::key(&q, self.cell);
        for di in -reach..=reach {
            for dj in -reach..=reach {
                if let Some(bin) = self.bins.get(&(ci + di, cj + dj)) {
                    for &k in bin {
                        let p = self.points[k as usize];
                        let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                        if dx * dx + dy * dy <= r2 {
                            f(k as usize);
                        }
                    }
                }
            }
        }
    }

    /// Sorted indices within `radius` of `q`.
    pub fn within(&self, q: [f64; 2], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(q, radius, |k| out.push(k));
        out.sort_unstable();
        out
    }
}

/// `½ ln det(2πe Σ)` for the maximum-likelihood covariance Σ of `neighbors`;
/// `None` when there are fewer than `min_neighbors` points or Σ is singular.
pub fn point_entropy(neighbors: &[[f64; 2]], min_neighbors: usize) -> Option<f64> {
    let n = neighbors.len();
    if n < min_neighbors || n == 0 {
        return None;
    }
    let nf = n as f64;
    let (sx, sy) = neighbors.iter().fold((0.0, 0.0), |a, p| (a.0 + p[0], a.1 + p[1]));
    let (mx, my) = (sx / nf, sy / nf);
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for p in neighbors {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        xx += dx * dx;
        yy += dy * dy;
        xy += dx * dy;
    }
    entropy_from_moments(xx / nf, yy / nf, xy / nf)
}

fn entropy_from_moments(xx: f64, yy: f64, xy: f64) -> Option<f64> {
    let det = xx * yy - xy * xy;
    (det > 0.0).then(|| (2.0 * PI * E).ln() + 0.5 * det.ln())
}

/// Same as [`point_entropy`] on the neighbors found through an index, without
/// materializing the neighbor list.
fn indexed_point_entropy(index: &RadiusIndex<'_>, q: [f64; 2], cfg: &EntropyConfig) -> Option<f64> {
    let (mut n, mut sx, mut sy) = (0usize, 0.0, 0.0);
    index.for_each_within(q, cfg.radius, |k| {
        let p = index.points[k];
        n += 1;
        sx += p[0];
        sy += p[1];
    });
    if n < cfg.min_neighbors {
        return None;
    }
    let nf = n as f64;
    let (mx, my) = (sx / nf, sy / nf);
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    index.for_each_within(q, cfg.radius, |k| {
        let p = index.points[k];
        let (dx, dy) = (p[0] - mx, p[1] - my);
        xx += dx * dx;
        yy += dy * dy;
        xy += dx * dy;
    });
    entropy_from_moments(xx / nf, yy / nf, xy / nf)
}

/// Mean point entropy over all non-skipped points.
pub fn map_entropy(points: &[[f64; 2]], cfg: &EntropyConfig) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyMap);
    }
    let index = RadiusIndex::new(points, cfg.radius);
    let per_point: Vec<Option<f64>> = points
        .par_iter()
        .step_by(cfg.query_stride)
        .map(|q| indexed_point_entropy(&index, *q, cfg))
        .collect();
    let (sum, count) = per_point
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), h| (s + h, c + 1));
    if count == 0 {
        return Err(Error::AllPointsSkipped);
    }
    Ok(sum / count as f64)
}

pub fn delta_entropy(h_all: f64, h_cur: f64, h_other: f64, formula: DeltaFormula) -> f64 {
    match formula {
        DeltaFormula::MeanOfParts => h_all - 0.5 * (h_cur + h_other),
        DeltaFormula::Literal => h_all - 0.5 * (h_cur - h_other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParts {
    pub h_all: f64,
    pub h_current: f64,
    pub h_other: f64,
    pub delta: f64,
}

pub struct EntropyDetector {
    cfg: EntropyConfig,
    other_cache: Option<(Vec<(VertexId, [u64; 3])>, f64)>,
    last: Option<EntropyParts>,
}

fn endpoints<'a>(vs: impl Iterator<Item = &'a VertexView>) -> Vec<[f64; 2]> {
    vs.flat_map(|v| v.scan.global_endpoints()).collect()
}

impl EntropyDetector {
    pub fn new(cfg: EntropyConfig) -> Self {
        Self {
            cfg,
            other_cache: None,
            last: None,
        }
    }

    pub fn last_parts(&self) -> Option<EntropyParts> {
        self.last
    }

    pub fn parts(&mut self, snapshot: &Snapshot) -> Result<EntropyParts> {
        require_merged(snapshot)?;
        let cur = endpoints(snapshot.current());
        let key: Vec<(VertexId, [u64; 3])> = snapshot
            .others()
            .map(|v| {
                let p = v.pose();
                (v.id, [p.x.to_bits(), p.y.to_bits(), p.theta.to_bits()])
            })
            .collect();
        let other = endpoints(snapshot.others());
        if cur.is_empty() || other.is_empty() {
            return Err(Error::EmptyMap);
        }
        let h_other = match &self.other_cache {
            Some((k, h)) if *k == key => *h,
            _ => {
                let h = map_entropy(&other, &self.cfg)?;
                self.other_cache = Some((key, h));
                h
            }
        };
        let h_current = map_entropy(&cur, &self.cfg)?;
        let mut all = cur;
        all.extend_from_slice(&other);
        let h_all = map_entropy(&all, &self.cfg)?;
        let parts = EntropyParts {
            h_all,
            h_current,
            h_other,
            delta: delta_entropy(h_all, h_current, h_other, self.cfg.delta_formula),
        };
        self.last = Some(parts);
        Ok(parts)
    }
}

impl Detector for EntropyDetector {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Entropy
    }

    fn threshold(&self) -> f64 {
        self.cfg.t_unmerge
    }

    fn reset(&mut self) {
        self.other_cache = None;
        self.last = None;
    }

    fn score(&mut self, snapshot: &Snapshot, _new_vertex: VertexId) -> Result<f64> {
        Ok(self.parts(snapshot)?.delta)
    }
}
