//! Scenario library: the toy crossing, twin corridors, a nearly symmetric room
//! and randomized flats.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::log::SequenceLog;
use super::script::{Kidnap, ScriptedMerge, TrajectoryScript, DEFAULT_MERGE_INFORMATION};
use super::sensor::SensorModel;
use super::world::World;
use crate::error::Result;
use crate::merge::MergeLabel;
use crate::pose::Pose2;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub world: World,
    pub script: TrajectoryScript,
    pub label: MergeLabel,
}

impl Scenario {
    pub fn simulate(&self, sensor: &SensorModel, seed: u64) -> Result<SequenceLog> {
        super::run_scenario(&self.world, &self.script, sensor, seed)
    }
}

fn p(x: f64, y: f64, theta: f64) -> Pose2 {
    Pose2::new(x, y, theta)
}

fn merge(at: usize, target_waypoint: Option<usize>, world_error: Pose2, label: MergeLabel) -> ScriptedMerge {
    ScriptedMerge {
        at_waypoint: at,
        target_epoch: 0,
        target_waypoint,
        world_error,
        label,
        information: DEFAULT_MERGE_INFORMATION,
    }
}

/// Three rooms A (north), B (east), C (south) and a dead-end west arm around a
/// four-way crossing at the origin. All arms differ in width and length.
pub fn crossing_world() -> World {
    let mut w = World::new();
    w.add_polygon(&[
        [1.0, 0.6],
        [1.0, 4.0],
        [3.5, 4.0],
        [3.5, 6.5],
        [-3.5, 6.5],
        [-3.5, 4.0],
        [-1.0, 4.0],
        [-1.0, 0.8],
        [-5.0, 0.8],
        [-5.0, -0.8],
        [-1.2, -0.8],
        [-1.2, -4.0],
        [-4.0, -4.0],
        [-4.0, -7.0],
        [4.0, -7.0],
        [4.0, -4.0],
        [1.2, -4.0],
        [1.2, -0.6],
        [4.0, -0.6],
        [4.0, -1.8],
        [9.0, -1.8],
        [9.0, 1.8],
        [4.0, 1.8],
        [4.0, 0.6],
    ])
    .expect("static geometry");
    w.add_box([2.2, 5.2], [3.0, 6.0]).expect("static geometry");
    w.add_box([7.8, -1.5], [8.6, -0.9]).expect("static geometry");
    w.add_box([-3.5, -6.5], [-2.8, -5.8]).expect("static geometry");
    w.add_place("A", [0.0, 5.2]);
    w.add_place("B", [6.5, 0.0]);
    w.add_place("C", [0.0, -5.5]);
    w.add_place("crossing", [0.0, 0.0]);
    w
}

/// The inactive epoch explores A, the crossing and B; after a kidnap into C the
/// robot returns through the crossing, where a merge is forced, then visits B and A.
/// The invalid variant rotates the inactive map clockwise by 90° about the crossing.
pub fn four_way_crossing(label: MergeLabel) -> Scenario {
    let waypoints = vec![
        p(0.0, 5.2, -FRAC_PI_2),
        p(-2.5, 5.5, 0.0),
        p(0.0, 5.2, 0.0),
        p(0.0, 0.0, 0.0),
        p(6.5, 0.0, 0.0),
        p(8.0, 0.6, 0.0),
        // epoch 1 starts in C
        p(0.0, -2.0, 0.0),
        p(0.0, 0.0, 0.0),
        p(6.5, 0.0, 0.0),
        p(0.0, 0.0, 0.0),
        p(0.0, 5.2, 0.0),
        p(-2.5, 5.5, 0.0),
    ];
    let error = match label {
        MergeLabel::Correct => Pose2::IDENTITY,
        MergeLabel::Invalid => Pose2::rotation_about([0.0, 0.0], -FRAC_PI_2),
    };
    Scenario {
        name: format!("crossing_{}", label.as_str()),
        world: crossing_world(),
        script: TrajectoryScript {
            waypoints,
            speed: 0.8,
            rate: 2.0,
            kidnaps: vec![Kidnap {
                at_waypoint: 5,
                to: p(0.0, -5.5, FRAC_PI_2),
            }],
            merges: vec![merge(7, Some(3), error, label)],
        },
        label,
    }
}

/// Two corridors 8 m apart that look the same for their first 10 m. The first
/// ends in a room, the second continues to a dead end at 19 m.
pub fn twin_corridor_world() -> World {
    let mut w = World::new();
    w.add_polygon(&[
        [0.0, -0.8],
        [10.0, -0.8],
        [10.0, -3.0],
        [14.0, -3.0],
        [14.0, 3.0],
        [10.0, 3.0],
        [10.0, 0.8],
        [0.0, 0.8],
    ])
    .expect("static geometry");
    w.add_box([12.6, 1.8], [13.5, 2.6]).expect("static geometry");
    w.add_polygon(&[[0.0, 7.2], [19.0, 7.2], [19.0, 8.8], [0.0, 8.8]])
    .expect("static geometry");
    w.add_place("corridor1", [1.0, 0.0]);
    w.add_place("corridor2", [1.0, 8.0]);
    w
}

/// The inactive epoch runs down corridor 1 into its room. The active epoch
/// starts at the entry of a corridor and a merge is forced after 2 m, aligned
/// to corridor 1. In the invalid variant the robot is really in corridor 2.
pub fn twin_corridor(label: MergeLabel) -> Scenario {
    let y = match label {
        MergeLabel::Correct => 0.0,
        MergeLabel::Invalid => 8.0,
    };
    let mut waypoints = vec![
        p(1.0, 0.0, 0.0),
        p(3.0, 0.0, 0.0),
        p(9.0, 0.0, 0.0),
        p(12.0, 0.0, 0.0),
        p(12.5, -1.5, 0.0),
        p(12.0, 1.0, 0.0),
        // epoch 1
        p(3.0, y, 0.0),
        p(9.5, y, 0.0),
    ];
    match label {
        MergeLabel::Correct => waypoints.extend([p(12.0, 0.0, 0.0), p(12.5, -1.5, 0.0), p(12.0, 1.5, 0.0)]),
        MergeLabel::Invalid => waypoints.extend([p(13.0, 8.0, 0.0), p(17.5, 8.0, 0.0), p(11.0, 8.0, 0.0)]),
    }
    // Aliasing maps corridor 1 onto corridor 2 by a pure shift.
    let error = Pose2::new(0.0, y, 0.0);
    Scenario {
        name: format!("twin_corridor_{}", label.as_str()),
        world: twin_corridor_world(),
        script: TrajectoryScript {
            waypoints,
            speed: 0.8,
            rate: 2.0,
            kidnaps: vec![Kidnap {
                at_waypoint: 5,
                to: p(1.0, y, 0.0),
            }],
            merges: vec![merge(6, Some(1), error, label)],
        },
        label,
    }
}

/// Rectangular room that is symmetric under a half turn except for one small
/// box in a corner.
pub fn symmetric_room_world() -> World {
    let mut w = World::new();
    w.add_polygon(&[[-4.0, -2.5], [4.0, -2.5], [4.0, 2.5], [-4.0, 2.5]])
        .expect("static geometry");
    w.add_box([-2.3, 0.7], [-1.7, 1.3]).expect("static geometry");
    w.add_box([1.7, -1.3], [2.3, -0.7]).expect("static geometry");
    w.add_box([3.3, 1.8], [3.8, 2.3]).expect("static geometry");
    w.add_place("center", [0.0, 0.0]);
    w
}

/// The invalid variant merges with a 180° rotation about the room center.
pub fn symmetric_room(label: MergeLabel) -> Scenario {
    let waypoints = vec![
        p(-3.0, -1.5, 0.0),
        p(0.0, 0.0, 0.0),
        p(3.0, 1.0, 0.0),
        p(3.0, -1.5, 0.0),
        // epoch 1
        p(-1.0, 0.0, 0.0),
        p(0.0, 0.0, 0.0),
        p(2.8, 0.6, 0.0),
        p(3.0, -1.8, 0.0),
        p(-3.0, -1.8, 0.0),
        p(-3.0, 1.5, 0.0),
    ];
    let error = match label {
        MergeLabel::Correct => Pose2::IDENTITY,
        MergeLabel::Invalid => Pose2::rotation_about([0.0, 0.0], PI),
    };
    Scenario {
        name: format!("symmetric_room_{}", label.as_str()),
        world: symmetric_room_world(),
        script: TrajectoryScript {
            waypoints,
            speed: 0.8,
            rate: 2.0,
            kidnaps: vec![Kidnap {
                at_waypoint: 3,
                to: p(-3.0, -1.5, 0.0),
            }],
            merges: vec![merge(5, Some(1), error, label)],
        },
        label,
    }
}

/// Parameters of the randomized flat generator.
#[derive(Debug, Clone)]
pub struct FlatParams {
    pub columns: std::ops::RangeInclusive<usize>,
    pub rows: std::ops::RangeInclusive<usize>,
    pub room_size: (f64, f64),
    pub door_width: f64,
    pub moves_before: usize,
    pub moves_after: usize,
    /// Rotation error range of invalid merges, radians.
    pub invalid_rotation: (f64, f64),
    /// Translation error range of invalid merges, meters.
    pub invalid_translation: (f64, f64),
}

impl Default for FlatParams {
    fn default() -> Self {
        Self {
            columns: 2..=3,
            rows: 2..=2,
            room_size: (3.5, 5.0),
            door_width: 1.0,
            moves_before: 3,
            moves_after: 3,
            invalid_rotation: (20f64.to_radians(), PI),
            invalid_translation: (1.0, 3.0),
        }
    }
}

struct Flat {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Door center between room `(i, j)` and its east (`.0`) and north (`.1`) neighbor.
    doors_east: Vec<Vec<f64>>,
    doors_north: Vec<Vec<f64>>,
}

impl Flat {
    fn cols(&self) -> usize {
        self.xs.len() - 1
    }

    fn rows(&self) -> usize {
        self.ys.len() - 1
    }

    fn center(&self, (i, j): (usize, usize)) -> [f64; 2] {
        [0.5 * (self.xs[i] + self.xs[i + 1]), 0.5 * (self.ys[j] + self.ys[j + 1])]
    }

    fn neighbors(&self, (i, j): (usize, usize)) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if i > 0 {
            out.push((i - 1, j));
        }
        if i + 1 < self.cols() {
            out.push((i + 1, j));
        }
        if j > 0 {
            out.push((i, j - 1));
        }
        if j + 1 < self.rows() {
            out.push((i, j + 1));
        }
        out
    }

    fn door(&self, a: (usize, usize), b: (usize, usize)) -> [f64; 2] {
        if a.1 == b.1 {
            let i = a.0.min(b.0);
            [self.xs[i + 1], self.doors_east[i][a.1]]
        } else {
            let j = a.1.min(b.1);
            [self.doors_north[a.0][j], self.ys[j + 1]]
        }
    }
}

fn random_walk(flat: &Flat, start: (usize, usize), moves: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut path = vec![start];
    for _ in 0..moves {
        let cur = *path.last().unwrap();
        let prev = path.len().checked_sub(2).map(|k| path[k]);
        let mut options = flat.neighbors(cur);
        if options.len() > 1 {
            options.retain(|n| Some(*n) != prev);
        }
        path.push(*options.choose(rng).unwrap());
    }
    path
}

/// A grid of rooms with doors between all neighbors and boxes in some corners.
///
/// The inactive epoch tours a few rooms; the active epoch starts elsewhere and
/// a merge is forced in the first room both epochs visited, matched to the
/// inactive epoch's visit of that room. Invalid merges carry a random rotation
/// about the robot and/or a translation.
pub fn random_flat(seed: u64, label: MergeLabel, params: &FlatParams) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(s) = try_random_flat(&mut rng, seed, label, params) {
            return s;
        }
    }
}

fn try_random_flat(rng: &mut ChaCha8Rng, seed: u64, label: MergeLabel, params: &FlatParams) -> Option<Scenario> {
    let cols = rng.gen_range(params.columns.clone());
    let rows = rng.gen_range(params.rows.clone());
    let (lo, hi) = params.room_size;
    let mut xs = vec![0.0];
    for _ in 0..cols {
        xs.push(xs.last().unwrap() + rng.gen_range(lo..hi));
    }
    let mut ys = vec![0.0];
    for _ in 0..rows {
        ys.push(ys.last().unwrap() + rng.gen_range(lo..hi));
    }
    let margin = 1.5;
    let mut door_at = |a: f64, b: f64| rng.gen_range(a + margin..b - margin);
    let doors_east: Vec<Vec<f64>> = (0..cols.saturating_sub(1))
        .map(|_| (0..rows).map(|j| door_at(ys[j], ys[j + 1])).collect())
        .collect();
    let doors_north: Vec<Vec<f64>> = (0..cols)
        .map(|i| (0..rows.saturating_sub(1)).map(|_| door_at(xs[i], xs[i + 1])).collect())
        .collect();
    let flat = Flat {
        xs,
        ys,
        doors_east,
        doors_north,
    };

    let mut world = World::new();
    let (w, h) = (flat.xs[cols], flat.ys[rows]);
    world.add_polygon(&[[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]]).ok()?;
    let half = 0.5 * params.door_width;
    for i in 0..cols.saturating_sub(1) {
        let x = flat.xs[i + 1];
        for j in 0..rows {
            let d = flat.doors_east[i][j];
            world.add_segment([x, flat.ys[j]], [x, d - half]).ok()?;
            world.add_segment([x, d + half], [x, flat.ys[j + 1]]).ok()?;
        }
    }
    for j in 0..rows.saturating_sub(1) {
        let y = flat.ys[j + 1];
        for i in 0..cols {
            let d = flat.doors_north[i][j];
            world.add_segment([flat.xs[i], y], [d - half, y]).ok()?;
            world.add_segment([d + half, y], [flat.xs[i + 1], y]).ok()?;
        }
    }
    for i in 0..cols {
        for j in 0..rows {
            let corners = [
                ([flat.xs[i], flat.ys[j]], [1.0, 1.0]),
                ([flat.xs[i + 1], flat.ys[j]], [-1.0, 1.0]),
                ([flat.xs[i + 1], flat.ys[j + 1]], [-1.0, -1.0]),
                ([flat.xs[i], flat.ys[j + 1]], [1.0, -1.0]),
            ];
            let n_boxes = rng.gen_range(1..=2);
            for (c, s) in corners.choose_multiple(rng, n_boxes) {
                let gap = rng.gen_range(0.1..0.3);
                let (bw, bh) = (rng.gen_range(0.3..0.8), rng.gen_range(0.3..0.8));
                let a = [c[0] + s[0] * gap, c[1] + s[1] * gap];
                let b = [a[0] + s[0] * bw, a[1] + s[1] * bh];
                world
                    .add_box([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])])
                    .ok()?;
            }
        }
    }

    let jitter = |rng: &mut ChaCha8Rng, c: [f64; 2]| [c[0] + rng.gen_range(-0.4..0.4), c[1] + rng.gen_range(-0.4..0.4)];
    let all_rooms: Vec<(usize, usize)> = (0..cols).flat_map(|i| (0..rows).map(move |j| (i, j))).collect();
    let start0 = *all_rooms.choose(rng)?;
    let tour0 = random_walk(&flat, start0, params.moves_before, rng);
    let start1 = *all_rooms.choose(rng)?;
    let tour1 = random_walk(&flat, start1, params.moves_before + params.moves_after, rng);

    // Merge in the first room of tour1 (after its start) that tour0 visited.
    let k = (1..tour1.len()).find(|&k| tour0.contains(&tour1[k]))?;
    if tour1.len() - 1 - k < params.moves_after.min(2) {
        return None;
    }
    let target_room = tour1[k];

    let mut waypoints = Vec::new();
    let mut room_waypoint = Vec::new();
    let c0 = jitter(rng, flat.center(start0));
    waypoints.push(p(c0[0], c0[1], rng.gen_range(-PI..PI)));
    room_waypoint.push(0);
    for pair in tour0.windows(2) {
        let d = flat.door(pair[0], pair[1]);
        waypoints.push(p(d[0], d[1], 0.0));
        let c = jitter(rng, flat.center(pair[1]));
        waypoints.push(p(c[0], c[1], 0.0));
        room_waypoint.push(waypoints.len() - 1);
    }
    let kidnap_at = waypoints.len() - 1;
    let target_waypoint = room_waypoint[tour0.iter().position(|r| *r == target_room)?];
    let c1 = jitter(rng, flat.center(start1));
    let teleport = p(c1[0], c1[1], rng.gen_range(-PI..PI));
    let mut trigger = None;
    for (idx, pair) in tour1.windows(2).enumerate() {
        let d = flat.door(pair[0], pair[1]);
        waypoints.push(p(d[0], d[1], 0.0));
        let c = jitter(rng, flat.center(pair[1]));
        waypoints.push(p(c[0], c[1], 0.0));
        if idx + 1 == k {
            trigger = Some((waypoints.len() - 1, c));
        }
    }
    let (trigger_wp, at) = trigger?;

    let error = match label {
        MergeLabel::Correct => {
            let small = 0.02;
            Pose2::new(rng.gen_range(-small..small), rng.gen_range(-small..small), rng.gen_range(-0.005..0.005))
        }
        MergeLabel::Invalid => {
            let (rlo, rhi) = params.invalid_rotation;
            let (tlo, thi) = params.invalid_translation;
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            match rng.gen_range(0..3) {
                0 => Pose2::rotation_about(at, sign * rng.gen_range(rlo..rhi)),
                1 => {
                    let dir = rng.gen_range(-PI..PI);
                    let len = rng.gen_range(tlo..thi);
                    Pose2::new(len * dir.cos(), len * dir.sin(), 0.0)
                }
                _ => {
                    let dir = rng.gen_range(-PI..PI);
                    let len = rng.gen_range(0.5 * tlo..thi);
                    let rot = Pose2::rotation_about(at, sign * rng.gen_range(0.5 * rlo..rhi));
                    Pose2::new(len * dir.cos(), len * dir.sin(), 0.0).compose(&rot)
                }
            }
        }
    };

    Some(Scenario {
        name: format!("flat_{seed}_{}", label.as_str()),
        world,
        script: TrajectoryScript {
            waypoints,
            speed: 0.8,
            rate: 2.0,
            kidnaps: vec![Kidnap {
                at_waypoint: kidnap_at,
                to: teleport,
            }],
            merges: vec![merge(trigger_wp, Some(target_waypoint), error, label)],
        },
        label,
    })
}
