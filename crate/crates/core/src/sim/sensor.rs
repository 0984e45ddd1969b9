use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::world::World;
use crate::error::{Error, Result};
use crate::pose::Pose2;
use crate::scan::Scan;

/// Planar lidar and odometry noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorModel {
    pub beams: usize,
    /// Angular span in radians, centered on the forward axis.
    pub span: f64,
    pub range_max: f64,
    pub range_sigma: f64,
    /// Per-step body-frame odometry noise `(σx, σy, σθ)` in m, m, rad.
    pub odometry_sigma: [f64; 3],
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            beams: 360,
            span: TAU,
            range_max: 10.0,
            range_sigma: 0.01,
            odometry_sigma: [0.002, 0.002, 0.001],
        }
    }
}

impl SensorModel {
    pub fn noiseless() -> Self {
        Self {
            range_sigma: 0.0,
            odometry_sigma: [0.0; 3],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beams < 2 {
            return Err(Error::Config("sensor.beams must be at least 2".into()));
        }
        if !(self.span > 0.0 && self.span <= TAU) || !(self.range_max > 0.0) {
            return Err(Error::Config("sensor.span must lie in (0, 2π] and range_max be positive".into()));
        }
        if !(self.range_sigma >= 0.0) || !self.odometry_sigma.iter().all(|s| *s >= 0.0) {
            return Err(Error::Config("sensor noise sigmas must be non-negative".into()));
        }
        Ok(())
    }

    /// `(bearing_origin, bearing_increment)`. A full circle is sampled at
    /// half-increment offsets so that no bearing sits on the ±π seam.
    pub fn bearings(&self) -> (f64, f64) {
        if (self.span - TAU).abs() < 1e-12 {
            let inc = TAU / self.beams as f64;
            (-std::f64::consts::PI + 0.5 * inc, inc)
        } else {
            let inc = self.span / (self.beams - 1) as f64;
            (-0.5 * self.span, inc)
        }
    }
}

/// Exact per-beam ranges; `None` where no wall lies within `range_max`.
pub fn cast_beams(world: &World, pose: &Pose2, sensor: &SensorModel) -> Vec<Option<f64>> {
    let (origin, inc) = sensor.bearings();
    (0..sensor.beams)
        .map(|i| {
            let angle = pose.theta + origin + i as f64 * inc;
            world
                .cast([pose.x, pose.y], angle)
                .filter(|r| *r <= sensor.range_max)
        })
        .collect()
}

/// Beam ranges with additive Gaussian noise, clipped to `(0, range_max]`.
pub fn noisy_beams(world: &World, pose: &Pose2, sensor: &SensorModel, rng: &mut impl Rng) -> Vec<Option<f64>> {
    let noise = Normal::new(0.0, sensor.range_sigma).expect("sigma validated");
    cast_beams(world, pose, sensor)
        .into_iter()
        .map(|r| {
            r.map(|r| {
                let r = if sensor.range_sigma > 0.0 { r + noise.sample(rng) } else { r };
                r.clamp(1e-6, sensor.range_max)
            })
        })
        .collect()
}

/// Noise-free scan at `pose` with beams that hit nothing dropped.
pub fn raycast(world: &World, pose: &Pose2, sensor: &SensorModel) -> Scan {
    let (origin, inc) = sensor.bearings();
    Scan::from_beams(*pose, origin, inc, &cast_beams(world, pose, sensor), sensor.range_max)
        .expect("raycast produces a valid scan")
}

/// Body-frame odometry measurement for the true motion `delta`.
pub fn noisy_odometry(delta: &Pose2, sensor: &SensorModel, rng: &mut impl Rng) -> Pose2 {
    let mut n = [0.0; 3];
    for (v, s) in n.iter_mut().zip(sensor.odometry_sigma) {
        if s > 0.0 {
            *v = Normal::new(0.0, s).expect("sigma validated").sample(rng);
        }
    }
    delta.compose(&Pose2::from_array(n))
}
