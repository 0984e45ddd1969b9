use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::log::{LogRecord, ScanRecord, SequenceLog};
use super::sensor::{noisy_beams, noisy_odometry, SensorModel};
use super::world::World;
use crate::error::{Error, Result};
use crate::merge::{MergeLabel, MergeRecord};
use crate::pose::{angular_distance, normalize_angle, Pose2};

/// Teleport after arriving at a waypoint; opens a new epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kidnap {
    pub at_waypoint: usize,
    pub to: Pose2,
}

/// A forced merge triggered on arrival at a waypoint.
///
/// The loop edge joins the arrival scan to the arrival scan of
/// `target_waypoint` (default: first scan of `target_epoch`). Its relative pose is the
/// ground truth with the target side moved by the world-frame transform
/// `world_error`, so the identity yields a correct merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedMerge {
    pub at_waypoint: usize,
    pub target_epoch: usize,
    #[serde(default)]
    pub target_waypoint: Option<usize>,
    pub world_error: Pose2,
    pub label: MergeLabel,
    pub information: [f64; 9],
}

pub const DEFAULT_MERGE_INFORMATION: [f64; 9] = [400.0, 0.0, 0.0, 0.0, 400.0, 0.0, 0.0, 0.0, 1600.0];

/// Robot path plus scripted events.
///
/// The robot drives straight between waypoint positions at `speed`, heading
/// along the direction of travel, and records a scan every `1/rate` seconds
/// and on every waypoint arrival. Waypoints that repeat the previous position
/// are turned to in place; their heading is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryScript {
    pub waypoints: Vec<Pose2>,
    pub speed: f64,
    pub rate: f64,
    #[serde(default)]
    pub kidnaps: Vec<Kidnap>,
    #[serde(default)]
    pub merges: Vec<ScriptedMerge>,
}

const TURN_STEP: f64 = 0.5;

impl TrajectoryScript {
    pub fn validate(&self, world: &World) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::Config("a script needs at least two waypoints".into()));
        }
        if !(self.speed > 0.0 && self.rate > 0.0) {
            return Err(Error::Config("speed and rate must be positive".into()));
        }
        for k in &self.kidnaps {
            if k.at_waypoint >= self.waypoints.len() || !world.contains([k.to.x, k.to.y]) {
                return Err(Error::Config(format!("kidnap at waypoint {} is outside the script or world", k.at_waypoint)));
            }
        }
        if let Some(p) = self.waypoints.iter().find(|p| !world.contains([p.x, p.y])) {
            return Err(Error::Config(format!("waypoint ({}, {}) outside the world", p.x, p.y)));
        }
        let epochs = 1 + self.kidnaps.len();
        for m in &self.merges {
            let bad_target = m.target_waypoint.is_some_and(|w| w >= m.at_waypoint);
            if m.at_waypoint >= self.waypoints.len() || m.target_epoch >= epochs || bad_target {
                return Err(Error::Config(format!("merge at waypoint {} references a missing epoch or waypoint", m.at_waypoint)));
            }
        }
        Ok(())
    }

    /// Ground-truth poses in order, with epoch breaks, and the scan ordinal of
    /// every waypoint arrival.
    fn plan(&self) -> (Vec<PlanItem>, Vec<usize>) {
        let mut items = Vec::new();
        let mut arrivals = Vec::with_capacity(self.waypoints.len());
        let mut n = 0usize;
        let mut cur = self.waypoints[0];
        let step = self.speed / self.rate;
        items.push(PlanItem::Pose(cur));
        arrivals.push(n);
        let mut kidnaps: Vec<&Kidnap> = self.kidnaps.iter().collect();
        kidnaps.sort_by_key(|k| k.at_waypoint);
        let mut k_iter = kidnaps.into_iter().peekable();
        let mut handle_kidnaps = |i: usize, cur: &mut Pose2, items: &mut Vec<PlanItem>, n: &mut usize| {
            while let Some(k) = k_iter.next_if(|k| k.at_waypoint == i) {
                items.push(PlanItem::Break);
                *cur = k.to;
                items.push(PlanItem::Pose(*cur));
                *n += 1;
            }
        };
        handle_kidnaps(0, &mut cur, &mut items, &mut n);
        for (i, w) in self.waypoints.iter().enumerate().skip(1) {
            let dist = (w.x - cur.x).hypot(w.y - cur.y);
            if dist < 1e-9 {
                let turn = angular_distance(cur.theta, w.theta);
                let steps = (turn / TURN_STEP).ceil().max(1.0) as usize;
                let delta = normalize_angle(w.theta - cur.theta);
                for s in 1..=steps {
                    let p = Pose2::new(cur.x, cur.y, cur.theta + delta * s as f64 / steps as f64);
                    items.push(PlanItem::Pose(p));
                    n += 1;
                }
            } else {
                let heading = (w.y - cur.y).atan2(w.x - cur.x);
                let steps = (dist / step).ceil().max(1.0) as usize;
                for s in 1..=steps {
                    let f = s as f64 / steps as f64;
                    let p = Pose2::new(cur.x + f * (w.x - cur.x), cur.y + f * (w.y - cur.y), heading);
                    items.push(PlanItem::Pose(p));
                    n += 1;
                }
            }
            if let Some(PlanItem::Pose(p)) = items.last() {
                cur = *p;
            }
            arrivals.push(n);
            handle_kidnaps(i, &mut cur, &mut items, &mut n);
        }
        (items, arrivals)
    }
}

enum PlanItem {
    Pose(Pose2),
    Break,
}

/// Simulates `script` in `world`. Deterministic in `seed`.
pub fn run_scenario(world: &World, script: &TrajectoryScript, sensor: &SensorModel, seed: u64) -> Result<SequenceLog> {
    script.validate(world)?;
    sensor.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (items, arrivals) = script.plan();
    let (bearing_origin, bearing_increment) = sensor.bearings();
    let dt = 1.0 / script.rate;

    let mut gt: Vec<Pose2> = Vec::new();
    let mut epoch_first: Vec<usize> = vec![0];
    let mut records = Vec::new();
    let mut prev: Option<Pose2> = None;
    let mut t = 0.0;
    let mut merges: Vec<&ScriptedMerge> = script.merges.iter().collect();
    merges.sort_by_key(|m| m.at_waypoint);

    for item in items {
        match item {
            PlanItem::Break => {
                t += dt;
                records.push(LogRecord::EpochBreak { t });
                epoch_first.push(gt.len());
                prev = None;
            }
            PlanItem::Pose(pose) => {
                if !gt.is_empty() {
                    t += dt;
                }
                let odom = match prev {
                    Some(p) => noisy_odometry(&p.between(&pose), sensor, &mut rng),
                    None => Pose2::IDENTITY,
                };
                let ranges = noisy_beams(world, &pose, sensor, &mut rng);
                records.push(LogRecord::Scan(ScanRecord {
                    t,
                    odom: odom.to_array(),
                    bearing_origin,
                    bearing_increment,
                    range_max: sensor.range_max,
                    ranges,
                    gt_pose: Some(pose.to_array()),
                }));
                let ordinal = gt.len();
                gt.push(pose);
                prev = Some(pose);
                for m in merges.iter().filter(|m| arrivals[m.at_waypoint] == ordinal) {
                    let target_scan = m.target_waypoint.map(|w| arrivals[w]);
                    let target = target_scan.unwrap_or_else(|| epoch_first.get(m.target_epoch).copied().unwrap_or(0));
                    if target >= gt.len() {
                        return Err(Error::Config(format!("merge at waypoint {} targets a future scan", m.at_waypoint)));
                    }
                    let z = gt[ordinal].inverse().compose(&m.world_error).compose(&gt[target]);
                    records.push(LogRecord::MergeTrigger {
                        t,
                        merge: MergeRecord {
                            trigger_vertex: ordinal,
                            target_epoch: m.target_epoch,
                            target_vertex: target_scan,
                            relative_pose: z.to_array(),
                            information: m.information,
                            label: m.label,
                        },
                    });
                }
            }
        }
    }
    Ok(SequenceLog { records })
}
