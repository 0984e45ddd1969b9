use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A wall segment in world coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    /// Distance along the ray `origin + t·dir` (unit `dir`) to this segment, if hit at `t > 0`.
    pub fn ray_hit(&self, origin: [f64; 2], dir: [f64; 2]) -> Option<f64> {
        let e = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let denom = dir[0] * e[1] - dir[1] * e[0];
        if denom.abs() < 1e-15 {
            return None;
        }
        let w = [self.a[0] - origin[0], self.a[1] - origin[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / denom;
        let u = (w[0] * dir[1] - w[1] * dir[0]) / denom;
        (t > 1e-12 && (0.0..=1.0).contains(&u)).then_some(t)
    }
}

/// Static 2D environment made of wall segments, plus named places for scripting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct World {
    segments: Vec<Segment>,
    places: BTreeMap<String, [f64; 2]>,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_segment(&mut self, a: [f64; 2], b: [f64; 2]) -> Result<()> {
        let s = Segment::new(a, b);
        if !(a.iter().chain(&b).all(|v| v.is_finite()) && s.length() > 1e-9) {
            return Err(Error::Config(format!("degenerate wall segment {a:?} -> {b:?}")));
        }
        self.segments.push(s);
        Ok(())
    }

    /// Adds the closed polyline through `pts`.
    pub fn add_polygon(&mut self, pts: &[[f64; 2]]) -> Result<()> {
        for i in 0..pts.len() {
            self.add_segment(pts[i], pts[(i + 1) % pts.len()])?;
        }
        Ok(())
    }

    /// Adds the open polyline through `pts`.
    pub fn add_polyline(&mut self, pts: &[[f64; 2]]) -> Result<()> {
        for w in pts.windows(2) {
            self.add_segment(w[0], w[1])?;
        }
        Ok(())
    }

    /// Axis-aligned box obstacle.
    pub fn add_box(&mut self, min: [f64; 2], max: [f64; 2]) -> Result<()> {
        self.add_polygon(&[min, [max[0], min[1]], max, [min[0], max[1]]])
    }

    pub fn add_place(&mut self, name: &str, p: [f64; 2]) {
        self.places.insert(name.to_string(), p);
    }

    pub fn place(&self, name: &str) -> Option<[f64; 2]> {
        self.places.get(name).copied()
    }

    pub fn places(&self) -> &BTreeMap<String, [f64; 2]> {
        &self.places
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// `[min_x, min_y, max_x, max_y]` over all segment endpoints.
    pub fn bounds(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for s in &self.segments {
            for p in [s.a, s.b] {
                b[0] = b[0].min(p[0]);
                b[1] = b[1].min(p[1]);
                b[2] = b[2].max(p[0]);
                b[3] = b[3].max(p[1]);
            }
        }
        b
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let b = self.bounds();
        p[0] >= b[0] && p[0] <= b[2] && p[1] >= b[1] && p[1] <= b[3]
    }

    /// Nearest wall hit along a ray, if any.
    pub fn cast(&self, origin: [f64; 2], angle: f64) -> Option<f64> {
        let (s, c) = angle.sin_cos();
        self.segments
            .iter()
            .filter_map(|seg| seg.ray_hit(origin, [c, s]))
            .min_by(f64::total_cmp)
    }

    /// True when the straight path between two points crosses no wall.
    pub fn line_of_sight(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let d = (b[0] - a[0]).hypot(b[1] - a[1]);
        if d < 1e-12 {
            return true;
        }
        let angle = (b[1] - a[1]).atan2(b[0] - a[0]);
        self.cast(a, angle).map_or(true, |t| t >= d)
    }
}
