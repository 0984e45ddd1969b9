use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pose::Pose2;

/// One lidar return in sensor-polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub bearing: f64,
    pub range: f64,
}

/// A single lidar sweep with its global sensor pose.
///
/// The returns are shared behind an `Arc` and never change after ingestion,
/// so cloning a scan (and therefore a whole graph) does not copy range data.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub pose: Pose2,
    points: Arc<[PolarPoint]>,
    range_max: f64,
}

impl Scan {
    /// Builds a scan from already-filtered returns.
    ///
    /// Bearings must be strictly increasing and every range in `(0, range_max]`.
    pub fn new(pose: Pose2, points: Vec<PolarPoint>, range_max: f64) -> Result<Self> {
        if !(range_max > 0.0 && range_max.is_finite()) {
            return Err(Error::InvalidScan(format!("range_max must be positive, got {range_max}")));
        }
        for w in points.windows(2) {
            if !(w[1].bearing > w[0].bearing) {
                return Err(Error::InvalidScan(format!(
                    "bearings not strictly increasing: {} then {}",
                    w[0].bearing, w[1].bearing
                )));
            }
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.range > 0.0 && p.range <= range_max) || !p.bearing.is_finite())
        {
            return Err(Error::InvalidScan(format!(
                "return out of range: bearing {} range {}",
                p.bearing, p.range
            )));
        }
        Ok(Self {
            pose,
            points: points.into(),
            range_max,
        })
    }

    /// Builds a scan from an evenly spaced beam array. `None`, non-finite,
    /// non-positive and beyond-`range_max` returns are dropped.
    pub fn from_beams(
        pose: Pose2,
        bearing_origin: f64,
        bearing_increment: f64,
        ranges: &[Option<f64>],
        range_max: f64,
    ) -> Result<Self> {
        if !(bearing_increment > 0.0) {
            return Err(Error::InvalidScan(format!(
                "bearing increment must be positive, got {bearing_increment}"
            )));
        }
        let points = ranges
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                let r = (*r)?;
                (r.is_finite() && r > 0.0 && r <= range_max).then(|| PolarPoint {
                    bearing: bearing_origin + i as f64 * bearing_increment,
                    range: r,
                })
            })
            .collect();
        Self::new(pose, points, range_max)
    }

    pub fn points(&self) -> &[PolarPoint] {
        &self.points
    }

    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same returns, different pose.
    pub fn with_pose(&self, pose: Pose2) -> Scan {
        Scan {
            pose,
            points: Arc::clone(&self.points),
            range_max: self.range_max,
        }
    }

    /// True when both scans share the same underlying return buffer.
    pub fn shares_points_with(&self, other: &Scan) -> bool {
        Arc::ptr_eq(&self.points, &other.points)
    }

    pub fn local_endpoint(p: &PolarPoint) -> [f64; 2] {
        let (s, c) = p.bearing.sin_cos();
        [p.range * c, p.range * s]
    }

    /// Endpoints in the global frame, in point order.
    pub fn global_endpoints(&self) -> Vec<[f64; 2]> {
        self.points
            .iter()
            .map(|p| self.pose.transform_point(Self::local_endpoint(p)))
            .collect()
    }

    /// Axis-aligned bounds of the sensor origin and all endpoints: `[min_x, min_y, max_x, max_y]`.
    pub fn bounds(&self) -> [f64; 4] {
        let mut b = [self.pose.x, self.pose.y, self.pose.x, self.pose.y];
        for e in self.global_endpoints() {
            b[0] = b[0].min(e[0]);
            b[1] = b[1].min(e[1]);
            b[2] = b[2].max(e[0]);
            b[3] = b[3].max(e[1]);
        }
        b
    }
}
